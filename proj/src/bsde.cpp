#include "mfc/bsde.hpp"

#include <cmath>

namespace mfc {

namespace {

// Multi-indices of total degree <= deg over n variables, constant first.
std::vector<std::vector<int>> monomial_exponents(int n, int deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == n) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      cur[static_cast<std::size_t>(pos)] = e;
      rec(pos + 1, remaining - e);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
  };
  rec(0, deg);
  // Order by total degree so the constant column comes first.
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int e : a) sa += e;
    for (int e : b) sb += e;
    return sa < sb;
  });
  return out;
}

struct StepRegression {
  Eigen::LDLT<Mat> gram;
  const Mat* features = nullptr;

  // Fitted conditional expectation of each target column at the sample
  // points, via ridge least squares.
  Mat fit(const Mat& targets) const {
    const Mat beta = gram.solve(features->transpose() * targets);
    if (!all_finite(beta)) throw SolverError("bsde regression produced non-finite coefficients");
    return *features * beta;
  }
};

}  // namespace

int RegressionBasis::num_features(int n) const {
  return static_cast<int>(monomial_exponents(n, degree).size());
}

Mat RegressionBasis::design(const Mat& X) const {
  const int M = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  const auto exps = monomial_exponents(n, degree);
  Mat Phi(M, static_cast<int>(exps.size()));
  for (std::size_t c = 0; c < exps.size(); ++c) {
    Vec col = Vec::Ones(M);
    for (int j = 0; j < n; ++j)
      for (int e = 0; e < exps[c][static_cast<std::size_t>(j)]; ++e)
        col = col.cwiseProduct(X.col(j));
    Phi.col(static_cast<int>(c)) = col;
  }
  return Phi;
}

namespace {

// Core backward recursion. When out != nullptr the recursion writes the
// solved field; otherwise it accumulates the self-consistency error of
// the candidate field `given`.
double backward_pass(const ProblemSpec& spec, const DerivEngine& derivs,
                     const ParticleEnsemble& ens, const ControlField& controls,
                     const std::vector<Mat>& eta, double r0, const BsdeOptions& opts,
                     AdjointField* out, const AdjointField* given) {
  const int N = ens.grid.N;
  const int M = ens.M();
  const int n = spec.n;
  const int r = spec.r;
  const double dt = ens.grid.dt();
  const int P = opts.basis.num_features(n);
  if (M <= P)
    throw SolverError("bsde: design matrix needs more rows than columns (M = " +
                      std::to_string(M) + ", P = " + std::to_string(P) + ")");

  HamiltonianContext ctx{&spec, &derivs, r0};
  const double ridge = opts.basis.ridge_per_sample * M;

  AdjointField local;
  if (out != nullptr) {
    out->Y.assign(static_cast<std::size_t>(N + 1), Mat::Zero(M, n));
    out->Z.assign(static_cast<std::size_t>(N), Mat::Zero(M, n * r));
    out->Ycond.assign(static_cast<std::size_t>(N), Mat::Zero(M, n));
  }
  double err_acc = 0.0;
  double ynorm_acc = 0.0;

  for (int k = N - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = ens.grid.t(k);
    const MuStats mu = ens.slice_stats(k);
    const Mat& Ynext = (out != nullptr) ? out->Y[ku + 1] : given->Y[ku + 1];

    const Mat Phi = opts.basis.design(ens.X[ku]);
    Mat gram_m = Phi.transpose() * Phi;
    gram_m.diagonal().array() += ridge;
    StepRegression reg{Eigen::LDLT<Mat>(gram_m), &Phi};
    if (reg.gram.info() != Eigen::Success)
      throw SolverError("bsde: rank-deficient regression at step " + std::to_string(k));

    // Z from regression of Y_{k+1} dW^T / dt on the state basis.
    Mat ztargets(M, n * r);
    for (int m = 0; m < M; ++m) {
      const Mat zmat = (Ynext.row(m).transpose() * ens.noise->dW[ku].row(m)) / dt;  // n x r
      flatten_z(ztargets, m, zmat);
    }
    const Mat Zk = (out != nullptr) ? reg.fit(ztargets) : given->Z[ku];
    if (out != nullptr) out->Z[ku] = Zk;

    // Conditional expectation of Y_{k+1} given X_k. This is the adjoint
    // value entering the discrete stationarity conditions; Y_k itself
    // differs from it by dt times the driver.
    const Mat Ycond = reg.fit(Ynext);
    if (out != nullptr) out->Ycond[ku] = Ycond;

    const Mat* eta_k = eta.empty() ? nullptr : &eta[ku];
    Mat Ycur = Ycond;  // y-argument of the driver; refined by inner sweeps
    Mat Ynew(M, n);
    const int sweeps = std::max(1, opts.inner_picard_sweeps);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      ParticleSlice slice{t, &ens.X[ku], &controls.alpha[ku], &Ycur, &Zk, eta_k, &mu};
      const LionsAggregate aggH = lions_H_aggregate(ctx, slice);
      const LionsAggregate aggPhi = lions_phi_aggregate(ctx, slice);
      parallel_for(static_cast<std::size_t>(M), opts.workers, [&](std::size_t m) {
        const auto mi = static_cast<int>(m);
        const Vec x = ens.X[ku].row(mi).transpose();
        const Vec u = controls.alpha[ku].row(mi).transpose();
        const Vec y = Ycur.row(mi).transpose();
        const Mat z = unflatten_z(Zk, mi, n, r);
        Vec driver = grad_x_H(ctx, t, x, mu, u, y, z) + aggH.eval(x);
        if (eta_k != nullptr) {
          for (int i = 0; i < spec.d; ++i) {
            const double w = (*eta_k)(mi, i);
            if (w != 0.0) driver -= w * derivs.phi_grad_x(i, t, x, mu, u);
          }
          driver -= aggPhi.eval(x);
        }
        Ynew.row(mi) = (Ycond.row(mi).transpose() + dt * driver).transpose();
      });
      if (!all_finite(Ynew))
        throw SolverError("bsde: non-finite driver at step " + std::to_string(k));
      Ycur = Ynew;
    }

    if (out != nullptr) {
      out->Y[ku] = Ynew;
    } else {
      err_acc += (given->Y[ku] - Ynew).squaredNorm();
      ynorm_acc += given->Y[ku].squaredNorm();
    }
  }

  if (out != nullptr) return 0.0;
  const double cells = static_cast<double>(N) * M;
  const double rms_y = std::sqrt(ynorm_acc / cells);
  return std::sqrt(err_acc / cells) / (1.0 + rms_y);
}

}  // namespace

AdjointField solve_adjoint(const ProblemSpec& spec, const DerivEngine& derivs,
                           const ParticleEnsemble& ens, const ControlField& controls,
                           const std::vector<Mat>& eta, double r0, const BsdeOptions& opts) {
  AdjointField adj;
  backward_pass(spec, derivs, ens, controls, eta, r0, opts, &adj, nullptr);
  return adj;
}

double bsde_residual(const ProblemSpec& spec, const DerivEngine& derivs,
                     const ParticleEnsemble& ens, const AdjointField& adj,
                     const ControlField& controls, const std::vector<Mat>& eta, double r0,
                     const BsdeOptions& opts) {
  return backward_pass(spec, derivs, ens, controls, eta, r0, opts, nullptr, &adj);
}

}  // namespace mfc
