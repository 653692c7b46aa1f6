#pragma once

#include "mfc/bsde.hpp"
#include "mfc/kkt.hpp"

namespace mfc {

enum class MultiplierMode { KKT, FJ };

struct SolverOptions {
  int N = 50;
  int M = 500;
  double theta = 0.5;  // damping in (0, 1]
  int max_outer = 200;
  double tol_vi = 1e-6;
  double tol_comp = 1e-4;
  double tol_bsde = 1e-6;
  double tol_fix = 1e-4;
  MultiplierMode mode = MultiplierMode::KKT;
  std::uint64_t seed = 1;
  int basis_degree = 2;
  int inner_picard_sweeps = 1;
  int workers = 1;
  double rho_eta = 0.0;   // <= 0: auto 1/(1 + Lipschitz estimate)
  double rho_zeta = 0.0;  // <= 0: auto
  double uhat_tol = 1e-9;
  int uhat_max_iter = 200;
};

struct ResidualRow {
  int iter = 0;
  double vi = 0.0;
  double comp_state = 0.0;
  double comp_singular = 0.0;
  double dualfeas = 0.0;
  double primalfeas = 0.0;
  double bsde = 0.0;
  double control_change = 0.0;
  double cost = 0.0;
};

struct ResidualReport {
  std::vector<ResidualRow> history;
  std::string exit_status;  // "converged", "fixed_point", "not_converged"
  bool converged() const { return exit_status == "converged" || exit_status == "fixed_point"; }
};

struct Solution {
  ParticleEnsemble ensemble;
  ControlField controls;
  AdjointField adjoint;
  MultiplierField multipliers;
  ResidualReport report;
  double cost = 0.0;           // J-hat at exit
  double int_phi_eta = 0.0;    // discrete integral of phi * eta at exit
};

/// Discretized cost functional: dt avg sum f + avg sum c . dzeta.
double estimate_cost(const ProblemSpec& spec, const ParticleEnsemble& ens,
                     const ControlField& controls);

/// Damped fixed-point iteration on the full constrained FBSDE system:
/// forward simulation, adjoint regression solve, Hamiltonian control
/// update, multiplier and singular projection updates, residual checks.
Solution solve(const ProblemSpec& spec, const SolverOptions& opts,
               const ControlField* warm_start = nullptr);

struct UniquenessResult {
  double max_pairwise_distance = 0.0;
  std::vector<bool> start_converged;
};

/// Runs solve from n_starts distinct initial guesses with the same
/// Brownian grid; distances compare zeta only through int G dzeta.
UniquenessResult uniqueness_probe(const ProblemSpec& spec, const SolverOptions& opts,
                                  int n_starts);

struct StabilityResult {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;  // 0/0 reported as 0
  bool both_converged = true;
};

/// Coupled two-run stability experiment under common noise with
/// perturbed initial laws.
StabilityResult stability_probe(const ProblemSpec& spec, const SolverOptions& opts,
                                const std::function<Vec(std::mt19937_64&)>& sampler1,
                                const std::function<Vec(std::mt19937_64&)>& sampler2);

}  // namespace mfc
