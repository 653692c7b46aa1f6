#pragma once

#include "mfc/problem.hpp"

namespace mfc {

/// Uniform grid t_k = k T / N, k = 0..N.
struct TimeGrid {
  int N = 2;
  double T = 1.0;
  double dt() const { return T / N; }
  double t(int k) const { return T * k / N; }
};

/// Shared Brownian increments, reproducible from (seed, particle stream)
/// and reusable across outer iterations.
struct BrownianGrid {
  TimeGrid grid;
  int M = 0, r = 0;
  std::vector<Mat> dW;  // N entries, each M x r, ~ Normal(0, dt)

  static BrownianGrid generate(const TimeGrid& grid, int M, int r, std::uint64_t seed);
};

/// Regular control alpha and singular increments dzeta on the grid.
struct ControlField {
  std::vector<Mat> alpha;  // N entries, M x l
  std::vector<Mat> dzeta;  // N entries, M x k, entrywise >= 0

  static ControlField zero(const ProblemSpec& spec, int N, int M);
};

struct ParticleEnsemble {
  TimeGrid grid;
  std::vector<Mat> X;  // N+1 entries, M x n
  const BrownianGrid* noise = nullptr;

  int M() const { return static_cast<int>(X[0].rows()); }
  MuStats slice_stats(int k) const;
};

/// Draws M i.i.d. samples of the initial law with per-particle streams.
Mat sample_initial_states(const ProblemSpec& spec, int M, std::uint64_t init_seed);

/// Euler-Maruyama step for the controlled McKean-Vlasov SDE with singular
/// increments applied after the diffusion part of each step.
ParticleEnsemble simulate_forward(const ProblemSpec& spec, const ControlField& controls,
                                  const BrownianGrid& noise, const Mat& initial_states,
                                  int workers = 1);

ParticleEnsemble simulate_forward(const ProblemSpec& spec, const ControlField& controls,
                                  const BrownianGrid& noise, std::uint64_t init_seed,
                                  int workers = 1);

struct MomentBound {
  double sup_moment = 0.0;
  double ratio = 0.0;
};

/// sup_k avg_m |X_k^m|^p and its ratio against 1 + avg |X_0|^p.
MomentBound moment_bound_check(const ParticleEnsemble& ens, double p);

/// Fraction of (k, m) grid points with phi^i >= -tol, one entry per i.
Vec constraint_occupation(const ProblemSpec& spec, const ParticleEnsemble& ens,
                          const ControlField& controls, double tol = 1e-8);

/// Time-major CSV dump: k, t, particle, x_0..x_{n-1}.
void dump_trajectories(const ParticleEnsemble& ens, const std::string& path);

}  // namespace mfc
