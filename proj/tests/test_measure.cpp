#include <doctest.h>

#include <random>

#include "mfc/measure.hpp"

using namespace mfc;

namespace {

EmpiricalLaw cloud1d(std::initializer_list<double> xs) {
  EmpiricalLaw law;
  law.points = Mat(static_cast<int>(xs.size()), 1);
  int i = 0;
  for (double x : xs) law.points(i++, 0) = x;
  return law;
}

EmpiricalLaw random_cloud(int M, int n, std::mt19937_64& rng) {
  EmpiricalLaw law;
  law.points = Mat(M, n);
  std::normal_distribution<double> N01;
  for (int m = 0; m < M; ++m)
    for (int j = 0; j < n; ++j) law.points(m, j) = N01(rng);
  return law;
}

}  // namespace

TEST_CASE("moment stats of a three-point cloud") {
  const MuStats mu = moment_stats(cloud1d({-1.0, 0.0, 4.0}));
  CHECK(mu.mean(0) == doctest::Approx(1.0));
  CHECK(mu.m2 == doctest::Approx(17.0 / 3.0));
}

TEST_CASE("wasserstein-2 between shifted two-point clouds is the shift") {
  const W2Result w = wasserstein2(cloud1d({0.0, 2.0}), cloud1d({1.0, 3.0}));
  CHECK(w.exact);
  CHECK(w.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wasserstein-2 splits mass at sqrt cost") {
  const W2Result w = wasserstein2(cloud1d({0.0, 0.0}), cloud1d({0.0, 2.0}));
  CHECK(w.exact);
  CHECK(w.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("assignment solver picks the cheaper diagonal") {
  Mat cost(2, 2);
  cost << 1.0, 2.0, 3.0, 1.0;
  CHECK(assignment_cost(cost) == doctest::Approx(2.0));
}

TEST_CASE("wasserstein-2 is translation invariant on random clouds") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    EmpiricalLaw a = random_cloud(20, 2, rng);
    EmpiricalLaw b = random_cloud(20, 2, rng);
    const double base = wasserstein2(a, b).value;
    EmpiricalLaw at = a, bt = b;
    at.points.col(0).array() += 3.5;
    at.points.col(1).array() -= 1.25;
    bt.points.col(0).array() += 3.5;
    bt.points.col(1).array() -= 1.25;
    worst = std::max(worst, std::abs(wasserstein2(at, bt).value - base));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("wasserstein-2 satisfies the triangle inequality") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    EmpiricalLaw a = random_cloud(16, 1, rng);
    EmpiricalLaw b = random_cloud(16, 1, rng);
    EmpiricalLaw c = random_cloud(16, 1, rng);
    const double ab = wasserstein2(a, b).value;
    const double bc = wasserstein2(b, c).value;
    const double ac = wasserstein2(a, c).value;
    CHECK(ac <= ab + bc + 1e-12);
  }
}
