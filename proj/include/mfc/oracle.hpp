#pragma once

#include "mfc/solver.hpp"

namespace mfc {

/// Scalar linear-quadratic mean-field benchmark family:
/// dX = (a X + abar mean + bhat u) dt + sigma0 dW,
/// f = (q x^2 + qbar mean^2 + rho_u u^2) / 2, no constraint, no singular gain.
struct LQSpec {
  double a = 0.0;
  double abar = 0.0;
  double bhat = 1.0;
  double sigma0 = 1.0;
  double q = 1.0;
  double qbar = 0.0;
  double rho_u = 1.0;
  double T = 1.0;
  double x0_mean = 0.0;
  double x0_std = 0.0;
};

struct RiccatiResult {
  double cost = 0.0;
  Vec K;     // feedback gain on the solver grid, alpha* = -K x - kbar mean
  Vec kbar;
  Vec P;     // state Riccati function on the solver grid
  Vec p;     // mean component
};

/// Backward RK4 integration of the coupled Riccati system on a grid at
/// least 10x finer than the solver grid; cost from the value function.
RiccatiResult riccati_lq(const LQSpec& lq, const TimeGrid& grid, int refine = 10);

struct NlpOptions {
  int max_iter = 50000;
  double step_tol = 1e-8;
  int al_outer = 8;
  double al_rho = 10.0;
  double al_tol = 1e-8;  // skip AL when constraints never get this close to active
  int workers = 1;
};

struct NlpResult {
  ControlField controls;
  double cost = 0.0;             // J-hat at the returned point (no penalty)
  std::vector<Mat> multipliers;  // N entries, M x d augmented-Lagrangian estimates
  bool converged = true;
  int iterations = 0;
};

/// Direct minimization of the discretized cost over all (alpha, dzeta)
/// entries with the fixed Brownian grid: projected gradient with Armijo
/// line search and adjoint gradients; constraints handled by an
/// augmented-Lagrangian outer loop.
NlpResult discrete_nlp(const ProblemSpec& spec, int N_small, int M_small, std::uint64_t seed,
                       const NlpOptions& opts);

struct GapReport {
  double cost_gap_rel = 0.0;
  double control_rms_gap = 0.0;
  double eta_active_agreement = 1.0;    // fraction of grid points
  double dzeta_active_agreement = 1.0;
};

GapReport compare(const Solution& solution, const NlpResult& oracle, double active_tol = 1e-5);

}  // namespace mfc
