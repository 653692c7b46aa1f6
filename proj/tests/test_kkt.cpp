#include <doctest.h>

#include "mfc/kkt.hpp"

using namespace mfc;

TEST_CASE("fischer-burmeister hand values") {
  CHECK(fischer_burmeister(1.0, 1.0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(fischer_burmeister(0.0, 0.0) == doctest::Approx(0.0));
  CHECK(fischer_burmeister(3.0, 0.0) == doctest::Approx(0.0));
  CHECK(fischer_burmeister(0.0, 2.0) == doctest::Approx(0.0));
  // violated pair produces a nonzero residual
  CHECK(std::abs(fischer_burmeister(-1.0, 0.0)) > 0.5);
}

TEST_CASE("eta update fixes exactly the complementary pairs") {
  Mat eta(1, 2), phi(1, 2);
  eta << 0.0, 2.0;
  phi << 0.5, 0.0;
  const Mat next = update_eta(eta, phi, 0.7);
  CHECK(next(0, 0) == doctest::Approx(0.0));
  CHECK(next(0, 1) == doctest::Approx(2.0));

  // a violated constraint grows its multiplier, never below zero
  phi << -0.5, 4.0;
  const Mat moved = update_eta(eta, phi, 0.7);
  CHECK(moved(0, 0) == doctest::Approx(0.35));
  CHECK(moved(0, 1) == doctest::Approx(0.0));
  CHECK((moved.array() >= 0.0).all());
}

TEST_CASE("singular update projects onto the nonnegative orthant") {
  Mat dz(1, 1), s(1, 1);
  dz << 0.1;
  s << 2.0;
  CHECK(update_singular(dz, s, 1.0)(0, 0) == doctest::Approx(0.0));
  s << -0.3;
  CHECK(update_singular(dz, s, 1.0)(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("fritz-john normalization restores the unit dual budget") {
  const int N = 1, M = 1, d = 1;
  const double dt = 1.0;
  std::vector<Mat> eta(static_cast<std::size_t>(N), Mat::Constant(M, d, 3.0));
  const auto [r0, scaled] = fj_normalize(1.0, eta, dt);
  CHECK(r0 == doctest::Approx(0.25));
  CHECK(scaled[0](0, 0) == doctest::Approx(0.75));

  MultiplierField mf;
  mf.eta = scaled;
  mf.r0 = r0;
  CHECK(mf.r0 + mf.component_norm(0, dt) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("complementarity residuals vanish on a complementary field") {
  const double dt = 0.1;
  std::vector<Mat> phi{Mat::Constant(4, 1, 0.3)}, eta{Mat::Zero(4, 1)};
  std::vector<Mat> s{Mat::Constant(4, 1, 0.2)}, dz{Mat::Zero(4, 1)};
  const ComplementarityResiduals r = complementarity_residuals(phi, eta, s, dz, dt);
  CHECK(r.r_state == doctest::Approx(0.0));
  CHECK(r.r_singular == doctest::Approx(0.0));
  CHECK(r.r_dualfeas == doctest::Approx(0.0));
  CHECK(r.r_primalfeas == doctest::Approx(0.0));

  // primal violation shows up in exactly one channel
  phi[0](0, 0) = -0.4;
  const ComplementarityResiduals rv = complementarity_residuals(phi, eta, s, dz, dt);
  CHECK(rv.r_primalfeas == doctest::Approx(0.2));
  CHECK(rv.r_dualfeas == doctest::Approx(0.0));
}
