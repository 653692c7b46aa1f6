#include <doctest.h>

#include "mfc/registry.hpp"

using namespace mfc;

TEST_CASE("regression basis enumerates monomials up to the degree") {
  RegressionBasis basis;
  basis.degree = 2;
  CHECK(basis.num_features(1) == 3);
  CHECK(basis.num_features(2) == 6);
  Mat X(2, 1);
  X << 2.0, 3.0;
  const Mat Phi = basis.design(X);
  CHECK(Phi(0, 0) == doctest::Approx(1.0));  // constant column first
  CHECK(Phi(1, 0) == doctest::Approx(1.0));
  CHECK(Phi.row(1).sum() == doctest::Approx(1.0 + 3.0 + 9.0));
}

TEST_CASE("solved adjoint field is self-consistent, perturbed field is not") {
  const FamilyInstance fi =
      make_problem("lq", {{"sigma0", 0.3}, {"x0_mean", 1.0}, {"x0_std", 0.2}});
  const int N = 8, M = 64;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 21);
  const ControlField controls = ControlField::zero(fi.spec, N, M);
  const ParticleEnsemble ens = simulate_forward(fi.spec, controls, noise, 3);
  const DerivEngine derivs(fi.spec);
  BsdeOptions opts;
  AdjointField adj = solve_adjoint(fi.spec, derivs, ens, controls, {}, 1.0, opts);
  CHECK(adj.Y.back().norm() == 0.0);  // terminal condition
  CHECK(adj.Ycond.size() == adj.Z.size());

  const double res = bsde_residual(fi.spec, derivs, ens, adj, controls, {}, 1.0, opts);
  CHECK(res <= 1e-12);

  // injected fault: shift one time slice of Y and expect a visible residual
  adj.Y[2].array() += 0.1;
  const double bad = bsde_residual(fi.spec, derivs, ens, adj, controls, {}, 1.0, opts);
  CHECK(bad > 1e-3);
}

TEST_CASE("adjoint solve rejects underdetermined regressions") {
  const FamilyInstance fi = make_problem("lq", nlohmann::json::object());
  const int N = 4, M = 3;  // fewer samples than quadratic features
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 1);
  const ControlField cf = ControlField::zero(fi.spec, N, M);
  const ParticleEnsemble ens = simulate_forward(fi.spec, cf, noise, 1);
  const DerivEngine derivs(fi.spec);
  CHECK_THROWS_AS(solve_adjoint(fi.spec, derivs, ens, cf, {}, 1.0, BsdeOptions{}),
                  SolverError);
}
