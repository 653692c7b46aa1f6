#include <doctest.h>

#include "mfc/cli_io.hpp"

using namespace mfc;

namespace {

SolverOptions tiny_options() {
  SolverOptions so;
  so.N = 10;
  so.M = 150;
  so.max_outer = 200;
  so.seed = 3;
  return so;
}

}  // namespace

TEST_CASE("fixed-point solve reaches the closed-form LQ value") {
  const FamilyInstance fi = make_problem(
      "lq", {{"a", 0.2}, {"q", 1.0}, {"rho_u", 1.0}, {"sigma0", 0.2},
             {"x0_mean", 1.0}, {"x0_std", 0.1}});
  const SolverOptions so = tiny_options();
  const Solution sol = solve(fi.spec, so);
  CHECK(sol.report.converged());
  CHECK(!sol.report.history.empty());
  const RiccatiResult ric = riccati_lq(*fi.lq, TimeGrid{so.N, fi.spec.T});
  CHECK(std::abs(sol.cost - ric.cost) / std::abs(ric.cost) <= 0.05);
  // unconstrained instance keeps multipliers and singular control at zero
  for (const Mat& e : sol.multipliers.eta) CHECK(e.norm() == 0.0);
  CHECK(sol.multipliers.r0 == 1.0);
}

TEST_CASE("residual history is byte-stable across worker counts") {
  const FamilyInstance fi =
      make_problem("lq_constrained", {{"sigma0", 0.1}, {"phi_c", -0.5}});
  SolverOptions so = tiny_options();
  so.max_outer = 6;
  so.tol_fix = 1e-12;
  Solution a, b;
  so.workers = 1;
  a = solve(fi.spec, so);
  so.workers = 4;
  b = solve(fi.spec, so);
  CHECK(residual_csv(a.report) == residual_csv(b.report));
}

TEST_CASE("multipliers stay nonnegative on an active constraint") {
  const FamilyInstance fi = make_problem(
      "lq_constrained", {{"rho_u", 0.1}, {"sigma0", 0.05}, {"x0_mean", 1.0},
                         {"x0_std", 0.1}, {"phi_c", -0.5}});
  SolverOptions so = tiny_options();
  const Solution sol = solve(fi.spec, so);
  double max_eta = 0.0;
  for (const Mat& e : sol.multipliers.eta) {
    CHECK(e.minCoeff() >= 0.0);
    max_eta = std::max(max_eta, e.maxCoeff());
  }
  CHECK(max_eta > 0.0);  // the boundary is actually hit
  CHECK(std::abs(sol.int_phi_eta) <= 1e-2 * (1.0 + std::abs(sol.cost)));
}

TEST_CASE("cost estimate sums running and singular parts") {
  const FamilyInstance fi = make_problem(
      "lq_singular", {{"a", 0.0}, {"sigma0", 0.0}, {"q", 0.0}, {"g0", 1.0},
                      {"c0", 0.5}, {"x0_mean", 0.0}, {"x0_std", 0.0}});
  const int N = 4, M = 2;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 1);
  ControlField cf = ControlField::zero(fi.spec, N, M);
  for (auto& dz : cf.dzeta) dz.setConstant(0.25);
  const ParticleEnsemble ens = simulate_forward(fi.spec, cf, noise, 1);
  // f = rho_u u^2 / 2 = 0 with zero alpha; singular part = c0 sum dzeta = 0.5
  CHECK(estimate_cost(fi.spec, ens, cf) == doctest::Approx(0.5).epsilon(1e-12));
}
