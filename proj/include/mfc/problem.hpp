#pragma once

#include <optional>
#include <random>

#include "mfc/control_set.hpp"
#include "mfc/measure.hpp"
#include "mfc/types.hpp"

namespace mfc {

// Coefficient signatures. All coefficients read the law through MuStats
// only (moment-type mean-field dependence).
using DriftFn = std::function<Vec(double, const Vec&, const MuStats&, const Vec&)>;      // -> n
using DiffusionFn = std::function<Mat(double, const Vec&, const MuStats&, const Vec&)>;  // -> n x r
using ScalarFn = std::function<double(double, const Vec&, const MuStats&, const Vec&)>;

/// Optional analytic derivative callbacks. Missing entries fall back to
/// central finite differences inside DerivEngine.
struct Derivs {
  // Drift b: Jacobians and moment derivatives.
  std::function<Mat(double, const Vec&, const MuStats&, const Vec&)> b_jac_x;   // n x n, col j = db/dx_j
  std::function<Mat(double, const Vec&, const MuStats&, const Vec&)> b_jac_u;   // n x l
  std::function<Mat(double, const Vec&, const MuStats&, const Vec&)> b_dmean;   // n x n, col j = db/dmean_j
  std::function<Vec(double, const Vec&, const MuStats&, const Vec&)> b_dm2;     // n

  // Diffusion sigma (n x r): one matrix per perturbed coordinate.
  std::function<std::vector<Mat>(double, const Vec&, const MuStats&, const Vec&)> sigma_jac_x;
  std::function<std::vector<Mat>(double, const Vec&, const MuStats&, const Vec&)> sigma_jac_u;
  std::function<std::vector<Mat>(double, const Vec&, const MuStats&, const Vec&)> sigma_dmean;
  std::function<Mat(double, const Vec&, const MuStats&, const Vec&)> sigma_dm2;

  // Running cost f.
  std::function<Vec(double, const Vec&, const MuStats&, const Vec&)> f_grad_x;
  std::function<Vec(double, const Vec&, const MuStats&, const Vec&)> f_grad_u;
  std::function<Vec(double, const Vec&, const MuStats&, const Vec&)> f_dmean;
  std::function<double(double, const Vec&, const MuStats&, const Vec&)> f_dm2;

  // Constraints phi^i, one callback set per i (empty vectors = all FD).
  std::vector<std::function<Vec(double, const Vec&, const MuStats&, const Vec&)>> phi_grad_x;
  std::vector<std::function<Vec(double, const Vec&, const MuStats&, const Vec&)>> phi_grad_u;
  std::vector<std::function<Vec(double, const Vec&, const MuStats&, const Vec&)>> phi_dmean;
  std::vector<std::function<double(double, const Vec&, const MuStats&, const Vec&)>> phi_dm2;

  // Closed-form Hamiltonian minimizer u_hat(t, x, mu, y, z), if known.
  std::function<Vec(double, const Vec&, const MuStats&, const Vec&, const Mat&)> uhat;
};

/// Complete description of one constrained MFC instance. Immutable after
/// construction; coefficient callbacks must be safe for concurrent reads.
struct ProblemSpec {
  std::string name;
  double T = 1.0;
  int n = 1, l = 1, r = 1, k = 1, d = 1;

  DriftFn b;
  DiffusionFn sigma;
  ScalarFn f;
  std::function<Mat(double)> G;  // n x k
  std::function<Vec(double)> c;  // k, entrywise >= 0
  std::vector<ScalarFn> phi;     // d entries

  // Linear (C1) form phi(t,x,mu) = A(t) x + B(t) mean + C(t), declared
  // when the callbacks below are set.
  bool linear_constraint = false;
  std::function<Mat(double)> A;  // d x n
  std::function<Mat(double)> B;  // d x n
  std::function<Vec(double)> C;  // d

  bool phi_depends_on_u = false;

  ControlSet U;
  std::function<Vec(std::mt19937_64&)> sample_initial;  // one draw of xi
  double moment_order = 4.0;  // p > 2
  double c_strict_lower = 0.0;  // c0 in strict mode (A5); 0 = non-strict

  Derivs derivs;

  Vec eval_drift(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat eval_diffusion(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  double eval_cost(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  double eval_constraint(int i, double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec project_control(const Vec& u) const { return U.project(u); }
};

/// Evaluates coefficient derivatives, preferring analytic callbacks and
/// falling back to central differences with step h = 1e-5 (1 + |arg|).
class DerivEngine {
 public:
  explicit DerivEngine(const ProblemSpec& spec) : spec_(&spec) {}

  Mat b_jac_x(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat b_jac_u(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat b_dmean(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec b_dm2(double t, const Vec& x, const MuStats& mu, const Vec& u) const;

  std::vector<Mat> sigma_jac_x(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  std::vector<Mat> sigma_jac_u(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  std::vector<Mat> sigma_dmean(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat sigma_dm2(double t, const Vec& x, const MuStats& mu, const Vec& u) const;

  Vec f_grad_x(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec f_grad_u(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec f_dmean(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  double f_dm2(double t, const Vec& x, const MuStats& mu, const Vec& u) const;

  Vec phi_grad_x(int i, double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec phi_grad_u(int i, double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec phi_dmean(int i, double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  double phi_dm2(int i, double t, const Vec& x, const MuStats& mu, const Vec& u) const;

  const ProblemSpec& spec() const { return *spec_; }

  // Pure finite-difference paths (never dispatch to analytic callbacks);
  // used by the gradient-check suites.
  Vec fd_f_grad_x(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Vec fd_f_grad_u(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat fd_b_jac_x(double t, const Vec& x, const MuStats& mu, const Vec& u) const;
  Mat fd_b_jac_u(double t, const Vec& x, const MuStats& mu, const Vec& u) const;

 private:
  const ProblemSpec* spec_;
};

struct ProbeResult {
  std::string name;
  bool checked = true;  // false when no computable probe exists
  bool passed = true;
  double worst = 0.0;   // worst observed constant / violation
  std::string detail;
};

struct ValidationReport {
  std::vector<ProbeResult> probes;
  double lipschitz_hat = 0.0;   // observed Lipschitz constant M-hat
  double monotone_beta_hat = 0.0;  // observed beta-hat (C3), may be negative
  bool best_effort = false;     // any failed probe downgrades guarantees

  bool all_passed() const;
  const ProbeResult* find(const std::string& name) const;
};

/// Probabilistic assumption validation (report-only; never aborts).
ValidationReport validate_spec(const ProblemSpec& spec, int probes, std::uint64_t seed);

}  // namespace mfc
