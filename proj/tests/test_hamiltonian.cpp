#include <doctest.h>

#include "mfc/hamiltonian.hpp"

using namespace mfc;

namespace {

// Quartic scalar cost with stationarity u^3 + u + 1 = 0; no dynamics
// coupling so minimizing H in u minimizes f alone.
ProblemSpec quartic_spec() {
  ProblemSpec s;
  s.name = "quartic";
  s.n = s.l = s.r = s.k = 1;
  s.d = 0;
  s.b = [](double, const Vec&, const MuStats&, const Vec&) { return Vec::Zero(1); };
  s.sigma = [](double, const Vec&, const MuStats&, const Vec&) { return Mat::Zero(1, 1); };
  s.f = [](double, const Vec&, const MuStats&, const Vec& u) {
    const double v = u(0);
    return 0.25 * v * v * v * v + 0.5 * v * v + v;
  };
  s.G = [](double) { return Mat::Zero(1, 1); };
  s.c = [](double) { return Vec::Zero(1); };
  s.U = ControlSet::all();
  s.sample_initial = [](std::mt19937_64&) { return Vec::Zero(1); };
  return s;
}

double bisect_stationary_point() {
  // root of u^3 + u + 1 on [-1, 0]
  double lo = -1.0, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid * mid * mid + mid + 1.0;
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("projected gradient minimizer matches the bisection stationary point") {
  const ProblemSpec spec = quartic_spec();
  const DerivEngine derivs(spec);
  const HamiltonianContext ctx{&spec, &derivs, 1.0};
  MuStats mu;
  mu.mean = Vec::Zero(1);
  const MinimizeResult res = minimize_H_in_u(ctx, 0.0, Vec::Zero(1), mu, Vec::Zero(1),
                                             Mat::Zero(1, 1), Vec::Zero(1));
  CHECK(res.converged);
  CHECK(res.u(0) == doctest::Approx(bisect_stationary_point()).epsilon(1e-5));
}

TEST_CASE("hamiltonian value decomposes into drift, diffusion and cost terms") {
  const ProblemSpec spec = quartic_spec();
  const DerivEngine derivs(spec);
  const HamiltonianContext ctx{&spec, &derivs, 1.0};
  MuStats mu;
  mu.mean = Vec::Zero(1);
  const Vec u = Vec::Constant(1, 2.0);
  // b = 0 and sigma = 0, so H reduces to r0 f(u) = 4 + 2 + 2 = 8
  const double H = eval_H(ctx, 0.0, Vec::Zero(1), mu, u, Vec::Constant(1, 5.0),
                          Mat::Constant(1, 1, 3.0));
  CHECK(H == doctest::Approx(8.0));
}

TEST_CASE("fritz-john scaling damps the cost gradient") {
  const ProblemSpec spec = quartic_spec();
  const DerivEngine derivs(spec);
  const HamiltonianContext full{&spec, &derivs, 1.0};
  const HamiltonianContext half{&spec, &derivs, 0.5};
  MuStats mu;
  mu.mean = Vec::Zero(1);
  const Vec u = Vec::Constant(1, 1.0);
  const Vec gf = grad_u_H(full, 0.0, Vec::Zero(1), mu, u, Vec::Zero(1), Mat::Zero(1, 1));
  const Vec gh = grad_u_H(half, 0.0, Vec::Zero(1), mu, u, Vec::Zero(1), Mat::Zero(1, 1));
  CHECK(gh(0) == doctest::Approx(0.5 * gf(0)).epsilon(1e-6));
}
