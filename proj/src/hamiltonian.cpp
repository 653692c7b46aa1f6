#include "mfc/hamiltonian.hpp"

#include <cmath>

namespace mfc {

double eval_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
              const Vec& u, const Vec& y, const Mat& z) {
  const auto& s = *ctx.spec;
  return s.b(t, x, mu, u).dot(y) + (s.sigma(t, x, mu, u).transpose() * z).trace() +
         ctx.r0 * s.f(t, x, mu, u);
}

Vec grad_x_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
             const Vec& u, const Vec& y, const Mat& z) {
  const auto& D = *ctx.derivs;
  Vec g = D.b_jac_x(t, x, mu, u).transpose() * y + ctx.r0 * D.f_grad_x(t, x, mu, u);
  const auto sx = D.sigma_jac_x(t, x, mu, u);
  for (int j = 0; j < ctx.spec->n; ++j)
    g(j) += (sx[static_cast<std::size_t>(j)].transpose() * z).trace();
  return g;
}

Vec grad_u_H(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
             const Vec& u, const Vec& y, const Mat& z) {
  const auto& D = *ctx.derivs;
  Vec g = D.b_jac_u(t, x, mu, u).transpose() * y + ctx.r0 * D.f_grad_u(t, x, mu, u);
  const auto su = D.sigma_jac_u(t, x, mu, u);
  for (int j = 0; j < ctx.spec->l; ++j)
    g(j) += (su[static_cast<std::size_t>(j)].transpose() * z).trace();
  return g;
}

Vec grad_u_lagrangian(const HamiltonianContext& ctx, double t, const Vec& x, const MuStats& mu,
                      const Vec& u, const Vec& y, const Mat& z, const Vec& eta) {
  Vec g = grad_u_H(ctx, t, x, mu, u, y, z);
  if (eta.size() == 0 || !ctx.spec->phi_depends_on_u) return g;
  for (int i = 0; i < ctx.spec->d; ++i)
    if (eta(i) != 0.0) g -= eta(i) * ctx.derivs->phi_grad_u(i, t, x, mu, u);
  return g;
}

LionsAggregate lions_H_aggregate(const HamiltonianContext& ctx, const ParticleSlice& slice) {
  const auto& s = *ctx.spec;
  const auto& D = *ctx.derivs;
  const int M = static_cast<int>(slice.X->rows());
  LionsAggregate agg;
  agg.a = Vec::Zero(s.n);
  for (int m = 0; m < M; ++m) {
    const Vec x = slice.X->row(m).transpose();
    const Vec u = slice.alpha->row(m).transpose();
    const Vec y = slice.Y->row(m).transpose();
    const Mat z = unflatten_z(*slice.Z, m, s.n, s.r);
    agg.a += D.b_dmean(slice.t, x, *slice.mu, u).transpose() * y +
             ctx.r0 * D.f_dmean(slice.t, x, *slice.mu, u);
    const auto sm = D.sigma_dmean(slice.t, x, *slice.mu, u);
    for (int j = 0; j < s.n; ++j)
      agg.a(j) += (sm[static_cast<std::size_t>(j)].transpose() * z).trace();
    agg.c += D.b_dm2(slice.t, x, *slice.mu, u).dot(y) +
             (D.sigma_dm2(slice.t, x, *slice.mu, u).transpose() * z).trace() +
             ctx.r0 * D.f_dm2(slice.t, x, *slice.mu, u);
  }
  agg.a /= M;
  agg.c /= M;
  return agg;
}

LionsAggregate lions_phi_aggregate(const HamiltonianContext& ctx, const ParticleSlice& slice) {
  const auto& s = *ctx.spec;
  const auto& D = *ctx.derivs;
  const int M = static_cast<int>(slice.X->rows());
  LionsAggregate agg;
  agg.a = Vec::Zero(s.n);
  if (slice.eta == nullptr) return agg;
  for (int m = 0; m < M; ++m) {
    const Vec x = slice.X->row(m).transpose();
    const Vec u = slice.alpha->row(m).transpose();
    for (int i = 0; i < s.d; ++i) {
      const double w = (*slice.eta)(m, i);
      if (w == 0.0) continue;
      agg.a += w * D.phi_dmean(i, slice.t, x, *slice.mu, u);
      agg.c += w * D.phi_dm2(i, slice.t, x, *slice.mu, u);
    }
  }
  agg.a /= M;
  agg.c /= M;
  return agg;
}

Vec lions_term(const HamiltonianContext& ctx, const ParticleSlice& slice, const Vec& target_x) {
  return lions_H_aggregate(ctx, slice).eval(target_x);
}

MinimizeResult minimize_H_in_u(const HamiltonianContext& ctx, double t, const Vec& x,
                               const MuStats& mu, const Vec& y, const Mat& z, const Vec& warm_start,
                               const Vec& eta, double tol_u, int max_iter) {
  const auto& s = *ctx.spec;
  MinimizeResult res;
  const bool use_eta = eta.size() > 0 && s.phi_depends_on_u;
  if (s.derivs.uhat && !use_eta && ctx.r0 == 1.0) {
    res.u = s.derivs.uhat(t, x, mu, y, z);
    return res;
  }
  auto objective = [&](const Vec& u) {
    double v = eval_H(ctx, t, x, mu, u, y, z);
    if (use_eta)
      for (int i = 0; i < s.d; ++i) v -= eta(i) * s.phi[static_cast<std::size_t>(i)](t, x, mu, u);
    return v;
  };
  Vec u = s.U.project(warm_start);
  double step = 1.0;
  bool converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Vec g = use_eta ? grad_u_lagrangian(ctx, t, x, mu, u, y, z, eta)
                          : grad_u_H(ctx, t, x, mu, u, y, z);
    const Vec natural = u - s.U.project(u - g);
    if (natural.norm() <= tol_u) {
      converged = true;
      break;
    }
    // Armijo backtracking along the projected-gradient direction.
    const double f0 = objective(u);
    double st = step;
    Vec candidate = u;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      candidate = s.U.project(u - st * g);
      const Vec d = candidate - u;
      if (objective(candidate) <= f0 + 1e-4 * g.dot(d)) {
        accepted = true;
        break;
      }
      st *= 0.5;
    }
    if (!accepted) break;
    u = candidate;
    step = std::min(1.0, st * 2.0);  // gentle step recovery
  }
  res.u = u;
  res.converged = converged;
  res.iterations = it;
  return res;
}

double vi_residual(const HamiltonianContext& ctx, const ParticleEnsemble& ens,
                   const ControlField& controls, const std::vector<Mat>& Y,
                   const std::vector<Mat>& Z, const std::vector<Mat>& eta, int workers) {
  const auto& s = *ctx.spec;
  const int N = ens.grid.N;
  const int M = ens.M();
  double acc = 0.0;
  std::vector<double> per_step(static_cast<std::size_t>(N), 0.0);
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = ens.grid.t(k);
    const MuStats mu = ens.slice_stats(k);
    std::vector<double> per_particle(static_cast<std::size_t>(M), 0.0);
    parallel_for(static_cast<std::size_t>(M), workers, [&](std::size_t m) {
      const auto mi = static_cast<int>(m);
      const Vec x = ens.X[ku].row(mi).transpose();
      const Vec u = controls.alpha[ku].row(mi).transpose();
      const Vec y = Y[ku].row(mi).transpose();
      const Mat z = unflatten_z(Z[ku], mi, s.n, s.r);
      const Vec et = eta.empty() ? Vec() : Vec(eta[ku].row(mi).transpose());
      const Vec g = grad_u_lagrangian(ctx, t, x, mu, u, y, z, et);
      per_particle[m] = (u - s.U.project(u - g)).squaredNorm();
    });
    for (double v : per_particle) per_step[ku] += v;  // serial reduction for determinism
  }
  for (double v : per_step) acc += v;
  return std::sqrt(acc / (static_cast<double>(N) * M));
}

}  // namespace mfc
