#include <doctest.h>

#include "mfc/registry.hpp"

using namespace mfc;

namespace {

// Drift-free singular instance: a = 0 and zero alpha make b vanish, so
// the state telescopes over the singular increments alone.
FamilyInstance pure_singular(double sigma0) {
  return make_problem("lq_singular", {{"a", 0.0}, {"sigma0", sigma0}, {"g0", 1.0},
                                      {"x0_mean", 0.0}, {"x0_std", 1.0}});
}

ControlField ramp_dzeta(const ProblemSpec& spec, int N, int M) {
  ControlField cf = ControlField::zero(spec, N, M);
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < M; ++m) cf.dzeta[static_cast<std::size_t>(k)](m, 0) = 0.01 * (k + m % 3);
  return cf;
}

}  // namespace

TEST_CASE("state increments telescope over the singular control") {
  const FamilyInstance fi = pure_singular(0.0);
  const int N = 8, M = 16;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 42);
  const ControlField cf = ramp_dzeta(fi.spec, N, M);
  const ParticleEnsemble ens = simulate_forward(fi.spec, cf, noise, 7);
  for (int m = 0; m < M; ++m) {
    double total = 0.0;
    for (int k = 0; k < N; ++k) total += cf.dzeta[static_cast<std::size_t>(k)](m, 0);
    CHECK(ens.X[static_cast<std::size_t>(N)](m, 0) - ens.X[0](m, 0) ==
          doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("displacement is linear in the singular input") {
  const FamilyInstance fi = pure_singular(0.3);
  const int N = 8, M = 16;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 42);
  const ControlField zero = ControlField::zero(fi.spec, N, M);
  ControlField one = ramp_dzeta(fi.spec, N, M);
  ControlField half = one;
  for (auto& dz : half.dzeta) dz *= 0.5;
  const ParticleEnsemble e0 = simulate_forward(fi.spec, zero, noise, 7);
  const ParticleEnsemble e1 = simulate_forward(fi.spec, one, noise, 7);
  const ParticleEnsemble eh = simulate_forward(fi.spec, half, noise, 7);
  for (int k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Mat lhs = eh.X[ku] - e0.X[ku];
    const Mat rhs = 0.5 * (e1.X[ku] - e0.X[ku]);
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
}

TEST_CASE("forward simulation is deterministic across worker counts") {
  const FamilyInstance fi = make_problem("lq", {{"sigma0", 0.4}, {"x0_std", 0.5}});
  const int N = 10, M = 32;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 99);
  ControlField cf = ControlField::zero(fi.spec, N, M);
  for (auto& a : cf.alpha) a.setConstant(0.2);
  const ParticleEnsemble e1 = simulate_forward(fi.spec, cf, noise, 5, 1);
  const ParticleEnsemble e4 = simulate_forward(fi.spec, cf, noise, 5, 4);
  for (int k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    CHECK((e1.X[ku] - e4.X[ku]).norm() == 0.0);
  }
}

TEST_CASE("moment bound stays finite") {
  const FamilyInstance fi = make_problem("lq", {{"sigma0", 0.3}, {"x0_mean", 1.0}});
  const int N = 10, M = 64;
  const TimeGrid grid{N, fi.spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M, fi.spec.r, 5);
  const ParticleEnsemble ens =
      simulate_forward(fi.spec, ControlField::zero(fi.spec, N, M), noise, 5);
  const MomentBound mb = moment_bound_check(ens, fi.spec.moment_order);
  CHECK(std::isfinite(mb.ratio));
  CHECK(mb.sup_moment > 0.0);
}

TEST_CASE("brownian grid increments have the grid variance") {
  const TimeGrid grid{20, 1.0};
  const BrownianGrid noise = BrownianGrid::generate(grid, 2000, 1, 123);
  double acc = 0.0;
  std::size_t count = 0;
  for (const Mat& dw : noise.dW) {
    acc += dw.squaredNorm();
    count += static_cast<std::size_t>(dw.size());
  }
  const double var = acc / static_cast<double>(count);
  CHECK(var == doctest::Approx(grid.dt()).epsilon(0.1));
}
