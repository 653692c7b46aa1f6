#pragma once

#include "mfc/forward.hpp"
#include "mfc/problem.hpp"

namespace mfc {

/// Hamiltonian calculus under the scalar r0 (KKT mode pins r0 = 1).
struct HamiltonianContext {
  const ProblemSpec* spec = nullptr;
  const DerivEngine* derivs = nullptr;
  double r0 = 1.0;
};

/// H^{r0} = <b, y> + tr(sigma^T z) + r0 f.
double eval_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
              const Vec& u, const Vec& y, const Mat& z);

Vec grad_x_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
             const Vec& u, const Vec& y, const Mat& z);

Vec grad_u_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
             const Vec& u, const Vec& y, const Mat& z);

/// grad_u H^{r0} - sum_i eta_i grad_u phi^i.
Vec grad_u_lagrangian(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
                      const Vec& u, const Vec& y, const Mat& z, const Vec& eta);

/// Per-time-slice particle data for the mean-field (Lions) averages.
/// Z rows hold the n x r matrix flattened column-major.
struct ParticleSlice {
  double t = 0.0;
  const Mat* X = nullptr;      // M x n
  const Mat* alpha = nullptr;  // M x l
  const Mat* Y = nullptr;      // M x n
  const Mat* Z = nullptr;      // M x (n*r)
  const Mat* eta = nullptr;    // M x d (only for the phi aggregate)
  const MuStats* mu = nullptr;
};

/// Cloud-average moment derivatives: the E'[d_mu .(x)] term evaluates to
/// a + 2 c x for any target x.
struct LionsAggregate {
  Vec a;
  double c = 0.0;
  Vec eval(const Vec& target_x) const { return a + 2.0 * c * target_x; }
};

/// E'[d_mu H(t, X', mu, alpha', Y', Z')(.)] as a moment-type aggregate.
LionsAggregate lions_H_aggregate(const HamiltonianContext& ctx, const ParticleSlice& slice);

/// sum_i E'[d_mu phi^i(t, X', mu, alpha')(.) eta^i'] as one aggregate.
LionsAggregate lions_phi_aggregate(const HamiltonianContext& ctx, const ParticleSlice& slice);

/// E'[d_mu H(...)(target_x)], the spec-level entry point.
Vec lions_term(const HamiltonianContext& ctx, const ParticleSlice& slice, const Vec& target_x);

struct MinimizeResult {
  Vec u;
  bool converged = true;
  int iterations = 0;
};

/// Pointwise Hamiltonian minimizer over U. Uses the closed-form u-hat
/// callback when the spec provides one and r0 = 1, otherwise projected gradient
/// descent with Armijo backtracking from the warm start. When eta is
/// nonempty and phi depends on u, minimizes the constraint-adjusted
/// Lagrangian H - sum_i eta_i phi^i instead.
MinimizeResult minimize_H_in_u(const HamiltonianContext& ctx, double t, const Vec& x,
                               const MuStats& mu, const Vec& y, const Mat& z, const Vec& warm_start,
                               const Vec& eta = Vec(), double tol_u = 1e-9, int max_iter = 200);

/// Natural-map VI residual: RMS over (k, m) of
/// |alpha - Proj_U(alpha - grad_u_lagrangian)| with unit step.
double vi_residual(const HamiltonianContext& ctx, const ParticleEnsemble& ens,
                   const ControlField& controls, const std::vector<Mat>& Y,
                   const std::vector<Mat>& Z, const std::vector<Mat>& eta, int workers = 1);

/// Reads row m of a flattened field back as an n x r matrix.
inline Mat unflatten_z(const Mat& Z, int m, int n, int r) {
  const Vec tmp = Z.row(m).transpose();
  return Eigen::Map<const Mat>(tmp.data(), n, r);
}

/// Writes an n x r matrix into row m of a flattened field.
inline void flatten_z(Mat& Z, int m, const Mat& z) {
  Z.row(m) = Eigen::Map<const Vec>(z.data(), z.size()).transpose();
}

}  // namespace mfc
