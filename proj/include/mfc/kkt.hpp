#pragma once

#include "mfc/types.hpp"

namespace mfc {

/// Pathwise constraint multiplier field and the Fritz-John scalar.
struct MultiplierField {
  std::vector<Mat> eta;  // N entries, M x d, entrywise >= 0
  double r0 = 1.0;       // in [0,1]; pinned to 1 in KKT mode

  static MultiplierField zero(int N, int M, int d, double r0 = 1.0);
  /// L2-norm of component i: sqrt(dt avg_m sum_k eta_i^2).
  double component_norm(int i, double dt) const;
};

/// Dual feasibility signal for the singular control:
/// s_i(t_k, m) = r0 c_i(t_k) + G_i(t_k)^T Y_k^m.
struct SingularSignal {
  std::vector<Mat> s;  // N entries, M x k
};

/// eta' = max(0, eta - rho * phi), entrywise. Fixed points are exactly
/// the discrete complementarity triples (phi >= 0, eta >= 0, eta phi = 0).
Mat update_eta(const Mat& eta, const Mat& phi_vals, double rho);

/// dzeta' = max(0, dzeta - rho * s), entrywise. Fixed points satisfy
/// (s >= 0, dzeta >= 0, dzeta s = 0).
Mat update_singular(const Mat& dzeta, const Mat& s, double rho);

struct ComplementarityResiduals {
  double r_state = 0.0;      // RMS Fischer-Burmeister psi(phi, eta)
  double r_singular = 0.0;   // RMS |min(dzeta/dt, s)|
  double r_dualfeas = 0.0;   // RMS max(0, -s)
  double r_primalfeas = 0.0; // RMS max(0, -phi)
};

double fischer_burmeister(double a, double b);

ComplementarityResiduals complementarity_residuals(const std::vector<Mat>& phi_vals,
                                                   const std::vector<Mat>& eta,
                                                   const std::vector<Mat>& s,
                                                   const std::vector<Mat>& dzeta, double dt);

/// Uniform rescaling so r0 + sum_i ||eta^i|| = 1 (FJ mode only).
std::pair<double, std::vector<Mat>> fj_normalize(double r0, const std::vector<Mat>& eta,
                                                 double dt);

}  // namespace mfc
