#include "mfc/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace mfc {

BrownianGrid BrownianGrid::generate(const TimeGrid& grid, int M, int r, std::uint64_t seed) {
  if (grid.N < 2) throw SolverError("BrownianGrid: N must be >= 2");
  BrownianGrid out;
  out.grid = grid;
  out.M = M;
  out.r = r;
  out.dW.assign(static_cast<std::size_t>(grid.N), Mat(M, r));
  const double sd = std::sqrt(grid.dt());
  for (int m = 0; m < M; ++m) {
    // One stream per particle: the grid is independent of generation order.
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(m)));
    std::normal_distribution<double> gauss(0.0, sd);
    for (int k = 0; k < grid.N; ++k)
      for (int j = 0; j < r; ++j) out.dW[static_cast<std::size_t>(k)](m, j) = gauss(rng);
  }
  return out;
}

ControlField ControlField::zero(const ProblemSpec& spec, int N, int M) {
  ControlField cf;
  const Vec u0 = spec.U.project(Vec::Zero(spec.l));
  cf.alpha.assign(static_cast<std::size_t>(N), Mat::Zero(M, spec.l));
  for (auto& a : cf.alpha)
    for (int m = 0; m < M; ++m) a.row(m) = u0.transpose();
  cf.dzeta.assign(static_cast<std::size_t>(N), Mat::Zero(M, spec.k));
  return cf;
}

MuStats ParticleEnsemble::slice_stats(int k) const {
  EmpiricalLaw law{X[static_cast<std::size_t>(k)]};
  return moment_stats(law);
}

Mat sample_initial_states(const ProblemSpec& spec, int M, std::uint64_t init_seed) {
  Mat X0(M, spec.n);
  for (int m = 0; m < M; ++m) {
    std::mt19937_64 rng(mix_seed(init_seed, 0xA110C000ULL + static_cast<std::uint64_t>(m)));
    X0.row(m) = spec.sample_initial(rng).transpose();
  }
  return X0;
}

ParticleEnsemble simulate_forward(const ProblemSpec& spec, const ControlField& controls,
                                  const BrownianGrid& noise, const Mat& initial_states,
                                  int workers) {
  const int N = noise.grid.N;
  const int M = noise.M;
  if (static_cast<int>(controls.alpha.size()) != N ||
      static_cast<int>(controls.dzeta.size()) != N)
    throw SolverError("simulate_forward: control field does not match the grid");
  if (initial_states.rows() != M || initial_states.cols() != spec.n)
    throw SolverError("simulate_forward: initial state dimensions inconsistent");
  for (const auto& dz : controls.dzeta)
    if (dz.minCoeff() < 0) throw SolverError("simulate_forward: dzeta must be nonnegative");

  ParticleEnsemble ens;
  ens.grid = noise.grid;
  ens.noise = &noise;
  ens.X.assign(static_cast<std::size_t>(N + 1), Mat(M, spec.n));
  ens.X[0] = initial_states;

  const double dt = noise.grid.dt();
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = noise.grid.t(k);
    const MuStats mu = ens.slice_stats(k);  // explicit scheme: law before the step
    const Mat Gt = spec.G(t);
    const Mat& Xk = ens.X[ku];
    Mat& Xn = ens.X[ku + 1];
    parallel_for(static_cast<std::size_t>(M), workers, [&](std::size_t m) {
      const auto mi = static_cast<int>(m);
      const Vec x = Xk.row(mi).transpose();
      const Vec u = controls.alpha[ku].row(mi).transpose();
      const Vec dw = noise.dW[ku].row(mi).transpose();
      const Vec dz = controls.dzeta[ku].row(mi).transpose();
      Xn.row(mi) = (x + spec.b(t, x, mu, u) * dt + spec.sigma(t, x, mu, u) * dw + Gt * dz)
                       .transpose();
    });
    if (!all_finite(Xn))
      throw SolverError("simulate_forward: state blow-up at step " + std::to_string(k + 1));
  }
  return ens;
}

ParticleEnsemble simulate_forward(const ProblemSpec& spec, const ControlField& controls,
                                  const BrownianGrid& noise, std::uint64_t init_seed,
                                  int workers) {
  return simulate_forward(spec, controls, noise, sample_initial_states(spec, noise.M, init_seed),
                          workers);
}

MomentBound moment_bound_check(const ParticleEnsemble& ens, double p) {
  if (p <= 2) throw SolverError("moment_bound_check: requires p > 2");
  MomentBound out;
  for (const auto& Xk : ens.X) {
    double avg = 0.0;
    for (int m = 0; m < Xk.rows(); ++m) avg += std::pow(Xk.row(m).norm(), p);
    avg /= static_cast<double>(Xk.rows());
    out.sup_moment = std::max(out.sup_moment, avg);
  }
  double init = 0.0;
  for (int m = 0; m < ens.X[0].rows(); ++m) init += std::pow(ens.X[0].row(m).norm(), p);
  init /= static_cast<double>(ens.X[0].rows());
  out.ratio = out.sup_moment / (1.0 + init);
  return out;
}

Vec constraint_occupation(const ProblemSpec& spec, const ParticleEnsemble& ens,
                          const ControlField& controls, double tol) {
  const int N = ens.grid.N;
  const int M = ens.M();
  Vec frac = Vec::Zero(spec.d);
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = ens.grid.t(k);
    const MuStats mu = ens.slice_stats(k);
    for (int m = 0; m < M; ++m) {
      const Vec x = ens.X[ku].row(m).transpose();
      const Vec u = controls.alpha[ku].row(m).transpose();
      for (int i = 0; i < spec.d; ++i)
        if (spec.eval_constraint(i, t, x, mu, u) >= -tol) frac(i) += 1.0;
    }
  }
  return frac / (static_cast<double>(N) * M);
}

void dump_trajectories(const ParticleEnsemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SolverError("dump_trajectories: cannot open " + path);
  const int n = static_cast<int>(ens.X[0].cols());
  out << "k,t,particle";
  for (int j = 0; j < n; ++j) out << ",x" << j;
  out << "\n";
  char buf[32];
  for (int k = 0; k <= ens.grid.N; ++k) {
    for (int m = 0; m < ens.M(); ++m) {
      out << k << ',' << ens.grid.t(k) << ',' << m;
      for (int j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", ens.X[static_cast<std::size_t>(k)](m, j));
        out << ',' << buf;
      }
      out << "\n";
    }
  }
}

}  // namespace mfc
