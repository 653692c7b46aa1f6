#include "mfc/kkt.hpp"

#include <cmath>

namespace mfc {

MultiplierField MultiplierField::zero(int N, int M, int d, double r0) {
  MultiplierField f;
  f.eta.assign(static_cast<std::size_t>(N), Mat::Zero(M, d));
  f.r0 = r0;
  return f;
}

double MultiplierField::component_norm(int i, double dt) const {
  double acc = 0.0;
  std::size_t cells = 0;
  for (const auto& e : eta) {
    acc += e.col(i).squaredNorm();
    cells += static_cast<std::size_t>(e.rows());
  }
  if (eta.empty() || cells == 0) return 0.0;
  const double M = static_cast<double>(cells) / static_cast<double>(eta.size());
  return std::sqrt(dt * acc / M);
}

Mat update_eta(const Mat& eta, const Mat& phi_vals, double rho) {
  if (rho <= 0) throw SolverError("update_eta: rho must be positive");
  return (eta - rho * phi_vals).cwiseMax(0.0);
}

Mat update_singular(const Mat& dzeta, const Mat& s, double rho) {
  if (rho <= 0) throw SolverError("update_singular: rho must be positive");
  if (dzeta.minCoeff() < 0) throw SolverError("update_singular: dzeta must be nonnegative");
  return (dzeta - rho * s).cwiseMax(0.0);
}

double fischer_burmeister(double a, double b) {
  return a + b - std::sqrt(a * a + b * b);
}

ComplementarityResiduals complementarity_residuals(const std::vector<Mat>& phi_vals,
                                                   const std::vector<Mat>& eta,
                                                   const std::vector<Mat>& s,
                                                   const std::vector<Mat>& dzeta, double dt) {
  ComplementarityResiduals out;
  double acc_state = 0.0, acc_sing = 0.0, acc_dual = 0.0, acc_primal = 0.0;
  std::size_t cells_state = 0, cells_sing = 0;
  for (std::size_t k = 0; k < phi_vals.size(); ++k) {
    const Mat& ph = phi_vals[k];
    const Mat& et = eta[k];
    for (int m = 0; m < ph.rows(); ++m)
      for (int i = 0; i < ph.cols(); ++i) {
        const double psi = fischer_burmeister(ph(m, i), et(m, i));
        acc_state += psi * psi;
        const double viol = std::max(0.0, -ph(m, i));
        acc_primal += viol * viol;
        ++cells_state;
      }
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Mat& sk = s[k];
    const Mat& dz = dzeta[k];
    for (int m = 0; m < sk.rows(); ++m)
      for (int i = 0; i < sk.cols(); ++i) {
        const double mn = std::min(dz(m, i) / dt, sk(m, i));
        acc_sing += mn * mn;  // residuals reported as magnitudes
        const double viol = std::max(0.0, -sk(m, i));
        acc_dual += viol * viol;
        ++cells_sing;
      }
  }
  if (cells_state > 0) {
    out.r_state = std::sqrt(acc_state / static_cast<double>(cells_state));
    out.r_primalfeas = std::sqrt(acc_primal / static_cast<double>(cells_state));
  }
  if (cells_sing > 0) {
    out.r_singular = std::sqrt(acc_sing / static_cast<double>(cells_sing));
    out.r_dualfeas = std::sqrt(acc_dual / static_cast<double>(cells_sing));
  }
  return out;
}

std::pair<double, std::vector<Mat>> fj_normalize(double r0, const std::vector<Mat>& eta,
                                                 double dt) {
  MultiplierField f;
  f.eta = eta;
  double total = r0;
  const int d = eta.empty() ? 0 : static_cast<int>(eta[0].cols());
  for (int i = 0; i < d; ++i) total += f.component_norm(i, dt);
  if (total <= 0) throw SolverError("fj_normalize: all multipliers are zero");
  std::vector<Mat> scaled = eta;
  for (auto& e : scaled) e /= total;
  return {r0 / total, std::move(scaled)};
}

}  // namespace mfc
