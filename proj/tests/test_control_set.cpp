#include <doctest.h>

#include <random>

#include "mfc/control_set.hpp"

using namespace mfc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("unit ball projection rescales along the ray") {
  const ControlSet U = ControlSet::ball(Vec::Zero(2), 1.0);
  const Vec p = U.project(v2(3.0, 4.0));
  CHECK(p(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(U.contains(p));
  // interior points are untouched
  CHECK((U.project(v2(0.1, -0.2)) - v2(0.1, -0.2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("box projection clamps per coordinate") {
  const ControlSet U = ControlSet::box(v2(-1.0, 0.0), v2(1.0, 2.0));
  const Vec p = U.project(v2(5.0, -3.0));
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == doctest::Approx(0.0));
}

TEST_CASE("halfspace intersection projection") {
  // single halfspace: orthogonal projection onto {u1 + u2 <= 0}
  const ControlSet single = ControlSet::halfspace_intersection({{v2(1.0, 1.0), 0.0}});
  const Vec p1 = single.project(v2(1.0, 1.0));
  CHECK(p1(0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(p1(1) == doctest::Approx(0.0).epsilon(1e-9));

  // quadrant {u1 <= 0, u2 <= 0}: projection is the componentwise min with 0
  const ControlSet quad =
      ControlSet::halfspace_intersection({{v2(1.0, 0.0), 0.0}, {v2(0.0, 1.0), 0.0}});
  const Vec p2 = quad.project(v2(2.0, 3.0));
  CHECK(p2(0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(p2(1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(quad.contains(p2, 1e-8));
}

TEST_CASE("projections are non-expansive") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N01;
  const ControlSet sets[] = {
      ControlSet::ball(v2(0.5, -0.5), 0.7), ControlSet::box(v2(-1.0, -1.0), v2(1.0, 1.0)),
      ControlSet::halfspace_intersection({{v2(1.0, 1.0), 0.5}, {v2(-1.0, 2.0), 1.0}})};
  for (const ControlSet& U : sets) {
    for (int rep = 0; rep < 200; ++rep) {
      const Vec u = v2(3.0 * N01(rng), 3.0 * N01(rng));
      const Vec v = v2(3.0 * N01(rng), 3.0 * N01(rng));
      CHECK((U.project(u) - U.project(v)).norm() <= (u - v).norm() + 1e-9);
    }
  }
}
