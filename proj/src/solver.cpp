#include "mfc/solver.hpp"

#include <cmath>

namespace mfc {

namespace {

double lipschitz_estimate(const ProblemSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x11A5ULL));
  std::normal_distribution<double> gauss(0.0, 1.0);
  MuStats mu;
  mu.mean = Vec::Zero(spec.n);
  mu.m2 = 1.0;
  double mhat = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double t = spec.T * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Vec x1(spec.n), x2(spec.n), u(spec.l);
    for (int j = 0; j < spec.n; ++j) {
      x1(j) = 2 * gauss(rng);
      x2(j) = 2 * gauss(rng);
    }
    for (int j = 0; j < spec.l; ++j) u(j) = gauss(rng);
    u = spec.U.project(u);
    const double dx = (x1 - x2).norm();
    if (dx < 1e-8) continue;
    const double q = ((spec.b(t, x1, mu, u) - spec.b(t, x2, mu, u)).norm() +
                      (spec.sigma(t, x1, mu, u) - spec.sigma(t, x2, mu, u)).norm()) /
                     dx;
    if (std::isfinite(q)) mhat = std::max(mhat, q);
  }
  return mhat;
}

struct FieldSet {
  std::vector<Mat> phi_vals;  // N entries, M x d
  std::vector<Mat> s;         // N entries, M x k
};

FieldSet evaluate_fields(const ProblemSpec& spec, const ParticleEnsemble& ens,
                         const ControlField& controls, const AdjointField& adj, double r0) {
  const int N = ens.grid.N;
  const int M = ens.M();
  FieldSet fs;
  fs.phi_vals.assign(static_cast<std::size_t>(N), Mat(M, spec.d));
  fs.s.assign(static_cast<std::size_t>(N), Mat(M, spec.k));
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = ens.grid.t(k);
    const MuStats mu = ens.slice_stats(k);
    const Mat Gt = spec.G(t);
    const Vec ct = spec.c(t);
    for (int m = 0; m < M; ++m) {
      const Vec x = ens.X[ku].row(m).transpose();
      const Vec u = controls.alpha[ku].row(m).transpose();
      for (int i = 0; i < spec.d; ++i)
        fs.phi_vals[ku](m, i) = spec.eval_constraint(i, t, x, mu, u);
      const Vec y = adj.Ycond[ku].row(m).transpose();
      fs.s[ku].row(m) = (r0 * ct + Gt.transpose() * y).transpose();
    }
  }
  return fs;
}

double rms_diff(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  double acc = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += (a[k] - b[k]).squaredNorm();
    cells += static_cast<std::size_t>(a[k].size());
  }
  return cells == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(cells));
}

double integral_phi_eta(const FieldSet& fs, const std::vector<Mat>& eta, double dt) {
  double acc = 0.0;
  for (std::size_t k = 0; k < fs.phi_vals.size(); ++k)
    acc += fs.phi_vals[k].cwiseProduct(eta[k]).sum() / fs.phi_vals[k].rows();
  return dt * acc;
}

}  // namespace

double estimate_cost(const ProblemSpec& spec, const ParticleEnsemble& ens,
                     const ControlField& controls) {
  const int N = ens.grid.N;
  const int M = ens.M();
  const double dt = ens.grid.dt();
  double run = 0.0, sing = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = ens.grid.t(k);
    const MuStats mu = ens.slice_stats(k);
    const Vec ct = spec.c(t);
    for (int m = 0; m < M; ++m) {
      run += spec.eval_cost(t, ens.X[ku].row(m).transpose(), mu,
                            controls.alpha[ku].row(m).transpose());
      sing += ct.dot(controls.dzeta[ku].row(m).transpose());
    }
  }
  return dt * run / M + sing / M;
}

Solution solve(const ProblemSpec& spec, const SolverOptions& opts,
               const ControlField* warm_start) {
  if (opts.theta <= 0 || opts.theta > 1) throw SolverError("solve: theta must be in (0,1]");
  const TimeGrid grid{opts.N, spec.T};
  const double dt = grid.dt();
  const BrownianGrid noise = BrownianGrid::generate(grid, opts.M, spec.r, opts.seed);
  const Mat X0 = sample_initial_states(spec, opts.M, mix_seed(opts.seed, 0x1717ULL));

  DerivEngine derivs(spec);
  BsdeOptions bsde_opts;
  bsde_opts.basis.degree = opts.basis_degree;
  bsde_opts.inner_picard_sweeps = opts.inner_picard_sweeps;
  bsde_opts.workers = opts.workers;

  const double lhat = (opts.rho_eta > 0 && opts.rho_zeta > 0)
                          ? 0.0
                          : lipschitz_estimate(spec, opts.seed);
  double rho_eta = opts.rho_eta > 0 ? opts.rho_eta : 1.0 / (1.0 + lhat);
  double rho_zeta = opts.rho_zeta > 0 ? opts.rho_zeta : 1.0 / (1.0 + lhat);
  double theta = opts.theta;

  ControlField controls = warm_start ? *warm_start : ControlField::zero(spec, opts.N, opts.M);
  MultiplierField mult = MultiplierField::zero(opts.N, opts.M, spec.d,
                                               opts.mode == MultiplierMode::FJ ? 1.0 : 1.0);

  Solution sol;
  double prev_vi = std::numeric_limits<double>::infinity();
  double prev_comp_sing = prev_vi;

  HamiltonianContext ctx{&spec, &derivs, mult.r0};

  for (int iter = 1; iter <= opts.max_outer; ++iter) {
    ctx.r0 = mult.r0;
    ParticleEnsemble ens = simulate_forward(spec, controls, noise, X0, opts.workers);
    AdjointField adj =
        solve_adjoint(spec, derivs, ens, controls, mult.eta, mult.r0, bsde_opts);
    FieldSet fs = evaluate_fields(spec, ens, controls, adj, mult.r0);

    // Residuals at the current iterate.
    ResidualRow row;
    row.iter = iter;
    row.vi = vi_residual(ctx, ens, controls, adj.Ycond, adj.Z, mult.eta, opts.workers);
    const ComplementarityResiduals comp =
        complementarity_residuals(fs.phi_vals, mult.eta, fs.s, controls.dzeta, dt);
    row.comp_state = comp.r_state;
    row.comp_singular = comp.r_singular;
    row.dualfeas = comp.r_dualfeas;
    row.primalfeas = comp.r_primalfeas;
    row.bsde = bsde_residual(spec, derivs, ens, adj, controls, mult.eta, mult.r0, bsde_opts);
    row.cost = estimate_cost(spec, ens, controls);
    sol.int_phi_eta = integral_phi_eta(fs, mult.eta, dt);

    const bool residuals_ok = row.vi <= opts.tol_vi && row.comp_state <= opts.tol_comp &&
                              row.comp_singular <= opts.tol_comp &&
                              row.dualfeas <= opts.tol_comp &&
                              row.primalfeas <= opts.tol_comp && row.bsde <= opts.tol_bsde &&
                              std::abs(sol.int_phi_eta) <= opts.tol_comp * (1.0 + std::abs(row.cost));

    // Control update: damped pointwise Hamiltonian minimization.
    ControlField next = controls;
    const int M = opts.M;
    for (int k = 0; k < opts.N; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double t = grid.t(k);
      const MuStats mu = ens.slice_stats(k);
      Mat& a_next = next.alpha[ku];
      parallel_for(static_cast<std::size_t>(M), opts.workers, [&](std::size_t m) {
        const auto mi = static_cast<int>(m);
        const Vec x = ens.X[ku].row(mi).transpose();
        const Vec y = adj.Ycond[ku].row(mi).transpose();
        const Mat z = unflatten_z(adj.Z[ku], mi, spec.n, spec.r);
        const Vec warm = controls.alpha[ku].row(mi).transpose();
        const Vec et = spec.phi_depends_on_u ? Vec(mult.eta[ku].row(mi).transpose()) : Vec();
        const MinimizeResult mr =
            minimize_H_in_u(ctx, t, x, mu, y, z, warm, et, opts.uhat_tol, opts.uhat_max_iter);
        const Vec damped = spec.U.project((1.0 - theta) * warm + theta * mr.u);
        a_next.row(mi) = damped.transpose();
      });
      next.dzeta[ku] = update_singular(controls.dzeta[ku], fs.s[ku], rho_zeta);
    }
    // Diminishing multiplier step: the ascent is a projected subgradient
    // iteration, so a 1/sqrt(iter) schedule keeps the total movement
    // unbounded while the steady-state oscillation dies out.
    const double rho_eta_k = rho_eta / std::sqrt(static_cast<double>(iter));
    std::vector<Mat> eta_next(mult.eta.size());
    for (std::size_t k = 0; k < mult.eta.size(); ++k)
      eta_next[k] = update_eta(mult.eta[k], fs.phi_vals[k], rho_eta_k);

    row.control_change = rms_diff(next.alpha, controls.alpha) +
                         rms_diff(next.dzeta, controls.dzeta) / dt;
    const double eta_change = rms_diff(eta_next, mult.eta);
    sol.report.history.push_back(row);

    if (residuals_ok) {
      sol.report.exit_status = "converged";
      sol.ensemble = std::move(ens);
      sol.adjoint = std::move(adj);
      sol.controls = controls;
      sol.multipliers = mult;
      sol.cost = row.cost;
      return sol;
    }

    // Step-size safeguards. The complementarity residuals are not
    // monotone along the multiplier ascent, so only clear degradation
    // against the best iterate shrinks the steps.
    if (row.vi > prev_vi * 1.000001) theta = std::max(0.05, theta * 0.5);
    const double sing_now = std::max(row.comp_singular, row.dualfeas);
    if (sing_now > 2.0 * prev_comp_sing && sing_now > opts.tol_comp) {
      rho_zeta = std::max(1e-3, rho_zeta * 0.5);
      prev_comp_sing = sing_now;
    }
    prev_vi = row.vi;
    prev_comp_sing = std::min(prev_comp_sing, sing_now);

    controls = std::move(next);
    mult.eta = std::move(eta_next);
    if (opts.mode == MultiplierMode::FJ) {
      double norm_sum = mult.r0;
      for (int i = 0; i < spec.d; ++i) norm_sum += mult.component_norm(i, dt);
      if (norm_sum > 0) {
        auto [r0n, etan] = fj_normalize(mult.r0, mult.eta, dt);
        mult.r0 = r0n;
        mult.eta = std::move(etan);
      }
    }

    if (row.control_change <= opts.tol_fix && eta_change <= opts.tol_fix) {
      // Fixed point of the outer map (controls and multipliers jointly);
      // finish with a consistent snapshot.
      ParticleEnsemble final_ens = simulate_forward(spec, controls, noise, X0, opts.workers);
      AdjointField final_adj =
          solve_adjoint(spec, derivs, final_ens, controls, mult.eta, mult.r0, bsde_opts);
      FieldSet final_fs = evaluate_fields(spec, final_ens, controls, final_adj, mult.r0);
      sol.int_phi_eta = integral_phi_eta(final_fs, mult.eta, dt);
      sol.report.exit_status = "fixed_point";
      sol.ensemble = std::move(final_ens);
      sol.adjoint = std::move(final_adj);
      sol.controls = controls;
      sol.multipliers = mult;
      sol.cost = estimate_cost(spec, sol.ensemble, controls);
      return sol;
    }
  }

  // Best iterate with status "not converged".
  sol.report.exit_status = "not_converged";
  ParticleEnsemble ens = simulate_forward(spec, controls, noise, X0, opts.workers);
  AdjointField adj = solve_adjoint(spec, derivs, ens, controls, mult.eta, mult.r0, bsde_opts);
  sol.ensemble = std::move(ens);
  sol.adjoint = std::move(adj);
  sol.controls = controls;
  sol.multipliers = mult;
  sol.cost = estimate_cost(spec, sol.ensemble, sol.controls);
  return sol;
}

UniquenessResult uniqueness_probe(const ProblemSpec& spec, const SolverOptions& opts,
                                  int n_starts) {
  if (n_starts < 1) throw SolverError("uniqueness_probe: n_starts must be >= 1");
  UniquenessResult out;
  std::vector<Solution> sols;
  for (int j = 0; j < n_starts; ++j) {
    ControlField start = ControlField::zero(spec, opts.N, opts.M);
    // Distinct deterministic offsets per start; same Brownian grid (seed).
    const double offset = (j == 0) ? 0.0 : ((j % 2 == 1) ? 1.0 : -1.0) * (1.0 + j / 2.0);
    const Vec u0 = spec.U.project(Vec::Constant(spec.l, offset));
    for (auto& a : start.alpha)
      for (int m = 0; m < a.rows(); ++m) a.row(m) = u0.transpose();
    Solution s = solve(spec, opts, &start);
    out.start_converged.push_back(s.report.converged());
    sols.push_back(std::move(s));
  }
  const double dt = spec.T / opts.N;
  auto cumulative_gzeta = [&](const Solution& s) {
    std::vector<Mat> acc(static_cast<std::size_t>(opts.N));
    Mat running = Mat::Zero(opts.M, spec.n);
    for (int k = 0; k < opts.N; ++k) {
      const Mat Gt = spec.G(dt * k);
      running += s.controls.dzeta[static_cast<std::size_t>(k)] * Gt.transpose();
      acc[static_cast<std::size_t>(k)] = running;
    }
    return acc;
  };
  for (std::size_t i = 0; i < sols.size(); ++i)
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      double d = rms_diff(sols[i].ensemble.X, sols[j].ensemble.X);
      d = std::max(d, rms_diff(sols[i].controls.alpha, sols[j].controls.alpha));
      d = std::max(d, rms_diff(sols[i].adjoint.Y, sols[j].adjoint.Y));
      d = std::max(d, rms_diff(sols[i].adjoint.Z, sols[j].adjoint.Z));
      d = std::max(d, rms_diff(sols[i].multipliers.eta, sols[j].multipliers.eta));
      d = std::max(d, rms_diff(cumulative_gzeta(sols[i]), cumulative_gzeta(sols[j])));
      out.max_pairwise_distance = std::max(out.max_pairwise_distance, d);
    }
  return out;
}

StabilityResult stability_probe(const ProblemSpec& spec, const SolverOptions& opts,
                                const std::function<Vec(std::mt19937_64&)>& sampler1,
                                const std::function<Vec(std::mt19937_64&)>& sampler2) {
  ProblemSpec s1 = spec, s2 = spec;
  s1.sample_initial = sampler1;
  s2.sample_initial = sampler2;
  const Solution a = solve(s1, opts);
  const Solution b = solve(s2, opts);

  StabilityResult out;
  out.both_converged = a.report.converged() && b.report.converged();
  const int N = opts.N, M = opts.M;
  const double dt = spec.T / N;

  double num = 0.0;
  num += (a.ensemble.X[static_cast<std::size_t>(N)] - b.ensemble.X[static_cast<std::size_t>(N)])
             .rowwise()
             .squaredNorm()
             .mean();
  Mat gz = Mat::Zero(M, spec.n);
  for (int k = 0; k < N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    num += dt * (a.ensemble.X[ku] - b.ensemble.X[ku]).rowwise().squaredNorm().mean();
    num += dt * (a.controls.alpha[ku] - b.controls.alpha[ku]).rowwise().squaredNorm().mean();
    num += dt * (a.adjoint.Y[ku] - b.adjoint.Y[ku]).rowwise().squaredNorm().mean();
    num += dt * (a.adjoint.Z[ku] - b.adjoint.Z[ku]).rowwise().squaredNorm().mean();
    num += dt * (a.multipliers.eta[ku] - b.multipliers.eta[ku]).rowwise().squaredNorm().mean();
    const Mat Gt = spec.G(dt * k);
    gz += (a.controls.dzeta[ku] - b.controls.dzeta[ku]) * Gt.transpose();
  }
  num += gz.rowwise().squaredNorm().mean();

  const double den = (a.ensemble.X[0] - b.ensemble.X[0]).rowwise().squaredNorm().mean();
  out.numerator = num;
  out.denominator = den;
  if (num == 0.0 && den == 0.0)
    out.ratio = 0.0;  // identical runs by convention
  else if (den == 0.0)
    out.ratio = std::numeric_limits<double>::infinity();
  else
    out.ratio = num / den;
  return out;
}

}  // namespace mfc
