#include <doctest.h>

#include "mfc/registry.hpp"

using namespace mfc;

TEST_CASE("riccati solution matches the tanh closed form") {
  // a = abar = qbar = 0, bhat = q = rho_u = 1 gives P(t) = tanh(T - t).
  LQSpec lq;
  lq.sigma0 = 0.0;
  lq.x0_mean = 1.0;
  const TimeGrid grid{20, lq.T};
  const RiccatiResult ric = riccati_lq(lq, grid, 50);
  CHECK(ric.P(0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-8));
  CHECK(ric.P(grid.N) == doctest::Approx(0.0));
  CHECK(ric.kbar.norm() <= 1e-12);
  // deterministic start: J = P(0) x0^2 / 2
  CHECK(ric.cost == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-8));
  // feedback gain equals P when bhat = rho_u = 1
  CHECK(ric.K(0) == doctest::Approx(ric.P(0)));
}

TEST_CASE("riccati oracle rejects degenerate control weights") {
  LQSpec lq;
  lq.rho_u = 0.0;
  CHECK_THROWS_AS(riccati_lq(lq, TimeGrid{10, 1.0}), SolverError);
}

TEST_CASE("discrete optimizer agrees with the riccati oracle on a tiny instance") {
  const nlohmann::json params = {{"a", 0.2}, {"q", 1.0}, {"rho_u", 1.0},
                                 {"sigma0", 0.2}, {"x0_mean", 1.0}, {"x0_std", 0.1}};
  const FamilyInstance fi = make_problem("lq", params);
  const int N = 10, M = 120;
  NlpOptions opts;
  const NlpResult nlp = discrete_nlp(fi.spec, N, M, 5, opts);
  CHECK(nlp.converged);
  const RiccatiResult ric = riccati_lq(*fi.lq, TimeGrid{N, fi.spec.T});
  // two independent references for the same value, discretization-level gap
  CHECK(std::abs(nlp.cost - ric.cost) / std::abs(ric.cost) <= 0.05);
}

TEST_CASE("discrete optimizer guards its problem-size budget") {
  const FamilyInstance fi = make_problem("lq", nlohmann::json::object());
  CHECK_THROWS_AS(discrete_nlp(fi.spec, 100, 100, 1, NlpOptions{}), SolverError);
  CHECK_THROWS_AS(discrete_nlp(fi.spec, 10, 5000, 1, NlpOptions{}), SolverError);
}
