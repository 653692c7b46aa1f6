#include "mfc/oracle.hpp"

#include <cmath>
#include <limits>

namespace mfc {

namespace {

// Right-hand sides in reversed time s = T - t.
struct RiccatiRhs {
  const LQSpec& lq;
  double dP(double P) const {
    return 2 * lq.a * P - (lq.bhat * lq.bhat / lq.rho_u) * P * P + lq.q;
  }
  double dp(double P, double p) const {
    return 2 * lq.abar * P + 2 * (lq.a + lq.abar) * p -
           (lq.bhat * lq.bhat / lq.rho_u) * (2 * P * p + p * p) + lq.qbar;
  }
};

}  // namespace

RiccatiResult riccati_lq(const LQSpec& lq, const TimeGrid& grid, int refine) {
  if (lq.rho_u <= 0 || lq.q < 0 || lq.q + lq.qbar < 0)
    throw SolverError("riccati_lq: ill-posed LQ data");
  const int Nf = grid.N * std::max(10, refine);
  const double h = lq.T / Nf;
  std::vector<double> P(static_cast<std::size_t>(Nf + 1), 0.0);
  std::vector<double> p(static_cast<std::size_t>(Nf + 1), 0.0);
  RiccatiRhs rhs{lq};
  // index j corresponds to reversed time s_j = j h, i.e. t = T - s_j.
  for (int j = 0; j < Nf; ++j) {
    const double Pj = P[static_cast<std::size_t>(j)];
    const double pj = p[static_cast<std::size_t>(j)];
    const double k1P = rhs.dP(Pj), k1p = rhs.dp(Pj, pj);
    const double k2P = rhs.dP(Pj + 0.5 * h * k1P), k2p = rhs.dp(Pj + 0.5 * h * k1P, pj + 0.5 * h * k1p);
    const double k3P = rhs.dP(Pj + 0.5 * h * k2P), k3p = rhs.dp(Pj + 0.5 * h * k2P, pj + 0.5 * h * k2p);
    const double k4P = rhs.dP(Pj + h * k3P), k4p = rhs.dp(Pj + h * k3P, pj + h * k3p);
    P[static_cast<std::size_t>(j + 1)] = Pj + h / 6.0 * (k1P + 2 * k2P + 2 * k3P + k4P);
    p[static_cast<std::size_t>(j + 1)] = pj + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (!std::isfinite(P[static_cast<std::size_t>(j + 1)]))
      throw SolverError("riccati_lq: Riccati blow-up (violated well-posedness)");
  }
  RiccatiResult out;
  out.K.resize(grid.N + 1);
  out.kbar.resize(grid.N + 1);
  out.P.resize(grid.N + 1);
  out.p.resize(grid.N + 1);
  const int stride = Nf / grid.N;
  for (int k = 0; k <= grid.N; ++k) {
    const auto j = static_cast<std::size_t>(Nf - k * stride);  // t_k = T - s_j
    out.P(k) = P[j];
    out.p(k) = p[j];
    out.K(k) = lq.bhat * P[j] / lq.rho_u;
    out.kbar(k) = lq.bhat * p[j] / lq.rho_u;
  }
  // Value function: J* = P(0) var/2 + Pi(0) mean^2 / 2 + (sigma0^2/2) int P dt,
  // with Pi = P + p. Trapezoidal quadrature on the fine grid.
  double intP = 0.0;
  for (int j = 0; j < Nf; ++j)
    intP += 0.5 * h * (P[static_cast<std::size_t>(j)] + P[static_cast<std::size_t>(j + 1)]);
  const double P0 = P[static_cast<std::size_t>(Nf)];
  const double Pi0 = P0 + p[static_cast<std::size_t>(Nf)];
  out.cost = 0.5 * P0 * lq.x0_std * lq.x0_std + 0.5 * Pi0 * lq.x0_mean * lq.x0_mean +
             0.5 * lq.sigma0 * lq.sigma0 * intP;
  return out;
}

// ---------------------------------------------------------------------------
// Discrete NLP oracle

namespace {

struct NlpWork {
  const ProblemSpec& spec;
  const DerivEngine& derivs;
  const BrownianGrid& noise;
  const Mat& X0;
  const NlpOptions& opts;
  std::vector<Mat> al_lambda;  // N entries M x d
  double al_rho = 10.0;

  double penalty(double phi, double lambda) const {
    const double w = std::max(0.0, lambda - al_rho * phi);
    return (w * w - lambda * lambda) / (2.0 * al_rho);
  }
  double weight(double phi, double lambda) const {
    return std::max(0.0, lambda - al_rho * phi);
  }

  // Objective (cost + AL penalty) at the given controls.
  double objective(const ControlField& cf, ParticleEnsemble* ens_out) const {
    ParticleEnsemble ens = simulate_forward(spec, cf, noise, X0, opts.workers);
    const int N = noise.grid.N, M = noise.M;
    const double dt = noise.grid.dt();
    double val = estimate_cost(spec, ens, cf);
    for (int k = 0; k < N; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double t = noise.grid.t(k);
      const MuStats mu = ens.slice_stats(k);
      for (int m = 0; m < M; ++m)
        for (int i = 0; i < spec.d; ++i)
          val += dt / M *
                 penalty(spec.eval_constraint(i, t, ens.X[ku].row(m).transpose(), mu,
                                              cf.alpha[ku].row(m).transpose()),
                         al_lambda[ku](m, i));
    }
    if (ens_out) *ens_out = std::move(ens);
    return val;
  }

  // Adjoint (pathwise) gradient of the objective wrt all control entries.
  void gradient(const ControlField& cf, const ParticleEnsemble& ens, std::vector<Mat>* g_alpha,
                std::vector<Mat>* g_dzeta) const {
    const int N = noise.grid.N, M = noise.M;
    const int n = spec.n, l = spec.l;
    const double dt = noise.grid.dt();
    g_alpha->assign(static_cast<std::size_t>(N), Mat::Zero(M, l));
    g_dzeta->assign(static_cast<std::size_t>(N), Mat::Zero(M, spec.k));
    Mat p = Mat::Zero(M, n);  // p_{k+1} while processing step k
    for (int k = N - 1; k >= 0; --k) {
      const auto ku = static_cast<std::size_t>(k);
      const double t = noise.grid.t(k);
      const MuStats mu = ens.slice_stats(k);
      const Mat Gt = spec.G(t);
      const Vec ct = spec.c(t);

      // Mean-field aggregates over the cloud (dynamics and cost).
      Vec aggA = Vec::Zero(n);
      double aggC = 0.0;
      for (int j = 0; j < M; ++j) {
        const Vec x = ens.X[ku].row(j).transpose();
        const Vec u = cf.alpha[ku].row(j).transpose();
        const Vec pj = p.row(j).transpose();
        const Vec dw = noise.dW[ku].row(j).transpose();
        aggA += dt * derivs.b_dmean(t, x, mu, u).transpose() * pj;
        const auto sm = derivs.sigma_dmean(t, x, mu, u);
        for (int q = 0; q < n; ++q)
          aggA(q) += (sm[static_cast<std::size_t>(q)] * dw).dot(pj);
        aggC += dt * derivs.b_dm2(t, x, mu, u).dot(pj) +
                (derivs.sigma_dm2(t, x, mu, u) * dw).dot(pj);
      }
      // cost + penalty aggregates (separate loop keeps weights together)
      Vec aggFa = Vec::Zero(n);
      double aggFc = 0.0;
      for (int j = 0; j < M; ++j) {
        const Vec x = ens.X[ku].row(j).transpose();
        const Vec u = cf.alpha[ku].row(j).transpose();
        aggFa += derivs.f_dmean(t, x, mu, u);
        aggFc += derivs.f_dm2(t, x, mu, u);
        for (int i = 0; i < spec.d; ++i) {
          const double w = weight(spec.eval_constraint(i, t, x, mu, u), al_lambda[ku](j, i));
          if (w != 0.0) {
            aggFa -= w * derivs.phi_dmean(i, t, x, mu, u);
            aggFc -= w * derivs.phi_dm2(i, t, x, mu, u);
          }
        }
      }
      aggA /= M;
      aggC /= M;
      aggFa /= M;
      aggFc /= M;

      Mat pnew(M, n);
      for (int m = 0; m < M; ++m) {
        const Vec x = ens.X[ku].row(m).transpose();
        const Vec u = cf.alpha[ku].row(m).transpose();
        const Vec pm = p.row(m).transpose();
        const Vec dw = noise.dW[ku].row(m).transpose();

        // Control gradients through cost and one-step dynamics.
        Vec ga = (dt / M) * derivs.f_grad_u(t, x, mu, u);
        for (int i = 0; i < spec.d; ++i) {
          const double w = weight(spec.eval_constraint(i, t, x, mu, u), al_lambda[ku](m, i));
          if (w != 0.0) ga -= (dt / M) * w * derivs.phi_grad_u(i, t, x, mu, u);
        }
        ga += dt * derivs.b_jac_u(t, x, mu, u).transpose() * pm;
        const auto su = derivs.sigma_jac_u(t, x, mu, u);
        for (int q = 0; q < l; ++q) ga(q) += (su[static_cast<std::size_t>(q)] * dw).dot(pm);
        (*g_alpha)[ku].row(m) = ga.transpose();
        (*g_dzeta)[ku].row(m) = (ct / M + Gt.transpose() * pm).transpose();

        // Adjoint recursion.
        Vec pk = pm + dt * derivs.b_jac_x(t, x, mu, u).transpose() * pm;
        const auto sx = derivs.sigma_jac_x(t, x, mu, u);
        for (int q = 0; q < n; ++q) pk(q) += (sx[static_cast<std::size_t>(q)] * dw).dot(pm);
        pk += aggA + 2.0 * aggC * x;
        Vec fx = derivs.f_grad_x(t, x, mu, u);
        for (int i = 0; i < spec.d; ++i) {
          const double w = weight(spec.eval_constraint(i, t, x, mu, u), al_lambda[ku](m, i));
          if (w != 0.0) fx -= w * derivs.phi_grad_x(i, t, x, mu, u);
        }
        pk += (dt / M) * (fx + aggFa + 2.0 * aggFc * x);
        pnew.row(m) = pk.transpose();
      }
      p = std::move(pnew);
    }
  }
};

}  // namespace

NlpResult discrete_nlp(const ProblemSpec& spec, int N_small, int M_small, std::uint64_t seed,
                       const NlpOptions& opts) {
  if (N_small > 20 || M_small > 500)
    throw SolverError("discrete_nlp: instance too large (N <= 20, M <= 500)");
  const TimeGrid grid{N_small, spec.T};
  const BrownianGrid noise = BrownianGrid::generate(grid, M_small, spec.r, seed);
  const Mat X0 = sample_initial_states(spec, M_small, mix_seed(seed, 0x1717ULL));
  DerivEngine derivs(spec);

  NlpWork work{spec, derivs, noise, X0, opts};
  work.al_lambda.assign(static_cast<std::size_t>(N_small), Mat::Zero(M_small, spec.d));
  work.al_rho = opts.al_rho;

  NlpResult res;
  res.controls = ControlField::zero(spec, N_small, M_small);
  const double dt = grid.dt();
  const double cells = static_cast<double>(N_small) * M_small;

  double prev_viol = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < std::max(1, opts.al_outer); ++outer) {
    // Inner projected-gradient minimization of the augmented Lagrangian.
    double step = static_cast<double>(M_small);  // gradient entries carry a 1/M factor
    ParticleEnsemble ens;
    double fval = work.objective(res.controls, &ens);
    for (int it = 0; it < opts.max_iter; ++it) {
      std::vector<Mat> ga, gz;
      work.gradient(res.controls, ens, &ga, &gz);
      bool accepted = false;
      double gdotd = 0.0, move = 0.0;
      ControlField cand;
      for (int ls = 0; ls < 60; ++ls) {
        cand = res.controls;
        gdotd = 0.0;
        move = 0.0;
        for (int k = 0; k < N_small; ++k) {
          const auto ku = static_cast<std::size_t>(k);
          for (int m = 0; m < M_small; ++m) {
            const Vec u = res.controls.alpha[ku].row(m).transpose();
            const Vec un = spec.U.project(u - step * ga[ku].row(m).transpose());
            cand.alpha[ku].row(m) = un.transpose();
            gdotd += ga[ku].row(m).dot((un - u).transpose());
            move += (un - u).squaredNorm();
          }
          const Mat dz = res.controls.dzeta[ku];
          const Mat dzn = (dz - step * gz[ku]).cwiseMax(0.0);
          cand.dzeta[ku] = dzn;
          gdotd += gz[ku].cwiseProduct(dzn - dz).sum();
          move += (dzn - dz).squaredNorm();
        }
        ParticleEnsemble ens_cand;
        const double fcand = work.objective(cand, &ens_cand);
        if (fcand <= fval + 1e-4 * gdotd) {
          res.controls = std::move(cand);
          ens = std::move(ens_cand);
          fval = fcand;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      res.iterations = it + 1;
      if (!accepted) {
        res.converged = false;  // line-search failure: return best point
        break;
      }
      if (std::sqrt(move / cells) < opts.step_tol) break;
      step = std::min(step * 4.0, 1e6);
      res.converged = true;
    }

    // Multiplier update and violation tracking.
    double viol = 0.0;
    bool any_near_active = false;
    for (int k = 0; k < N_small; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double t = grid.t(k);
      const MuStats mu = ens.slice_stats(k);
      for (int m = 0; m < M_small; ++m)
        for (int i = 0; i < spec.d; ++i) {
          const double phi = spec.eval_constraint(i, t, ens.X[ku].row(m).transpose(), mu,
                                                  res.controls.alpha[ku].row(m).transpose());
          const double lnew =
              std::max(0.0, work.al_lambda[ku](m, i) - work.al_rho * phi);
          work.al_lambda[ku](m, i) = lnew;
          viol = std::max(viol, -phi);
          if (phi < opts.al_tol || lnew > 0) any_near_active = true;
        }
    }
    if (!any_near_active) break;  // unconstrained in practice
    if (viol <= opts.al_tol) break;
    if (viol > 0.5 * prev_viol) work.al_rho *= 2.0;
    prev_viol = viol;
  }

  ParticleEnsemble ens_final = simulate_forward(spec, res.controls, noise, X0, opts.workers);
  res.cost = estimate_cost(spec, ens_final, res.controls);
  res.multipliers = work.al_lambda;
  return res;
}

GapReport compare(const Solution& solution, const NlpResult& oracle, double active_tol) {
  GapReport rep;
  const double denom = std::max(1e-12, std::abs(oracle.cost));
  rep.cost_gap_rel = std::abs(solution.cost - oracle.cost) / denom;

  double num = 0.0, den = 0.0;
  std::size_t agree_eta = 0, total_eta = 0, agree_dz = 0, total_dz = 0;
  for (std::size_t k = 0; k < solution.controls.alpha.size(); ++k) {
    num += (solution.controls.alpha[k] - oracle.controls.alpha[k]).squaredNorm();
    den += static_cast<double>(solution.controls.alpha[k].size());
    const Mat& eta = solution.multipliers.eta[k];
    const Mat& lam = oracle.multipliers[k];
    for (int m = 0; m < eta.rows(); ++m)
      for (int i = 0; i < eta.cols(); ++i) {
        agree_eta += (eta(m, i) > active_tol) == (lam(m, i) > active_tol);
        ++total_eta;
      }
    const Mat& dza = solution.controls.dzeta[k];
    const Mat& dzb = oracle.controls.dzeta[k];
    for (int m = 0; m < dza.rows(); ++m)
      for (int i = 0; i < dza.cols(); ++i) {
        agree_dz += (dza(m, i) > active_tol) == (dzb(m, i) > active_tol);
        ++total_dz;
      }
  }
  rep.control_rms_gap = std::sqrt(num / den);
  if (total_eta > 0)
    rep.eta_active_agreement = static_cast<double>(agree_eta) / static_cast<double>(total_eta);
  if (total_dz > 0)
    rep.dzeta_active_agreement = static_cast<double>(agree_dz) / static_cast<double>(total_dz);
  return rep;
}

}  // namespace mfc
