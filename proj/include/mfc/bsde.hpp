#pragma once

#include "mfc/hamiltonian.hpp"

namespace mfc {

/// Discretized adjoint processes. Z rows hold n x r flattened column-major.
struct AdjointField {
  std::vector<Mat> Y;      // N+1 entries, M x n; Y[N] = 0
  std::vector<Mat> Z;      // N entries, M x (n*r)
  std::vector<Mat> Ycond;  // N entries, regression estimate of E[Y_{k+1} | X_k]
};

/// Global polynomial regression basis: monomials in the state up to the
/// declared total degree, plus the constant.
struct RegressionBasis {
  int degree = 2;
  double ridge_per_sample = 1e-8;  // lambda_reg = ridge_per_sample * M

  int num_features(int n) const;
  Mat design(const Mat& X) const;  // M x P
};

struct BsdeOptions {
  RegressionBasis basis;
  int inner_picard_sweeps = 1;  // 1 = explicit backward Euler
  int workers = 1;
};

/// Backward least-squares regression solve of the adjoint constrained
/// BSDE with terminal value zero. eta may be empty (treated as zero).
AdjointField solve_adjoint(const ProblemSpec& spec, const DerivEngine& derivs,
                           const ParticleEnsemble& ens, const ControlField& controls,
                           const std::vector<Mat>& eta, double r0, const BsdeOptions& opts);

/// RMS one-step self-consistency error of a candidate (Y, Z) field,
/// normalized by (1 + RMS |Y|).
double bsde_residual(const ProblemSpec& spec, const DerivEngine& derivs,
                     const ParticleEnsemble& ens, const AdjointField& adj,
                     const ControlField& controls, const std::vector<Mat>& eta, double r0,
                     const BsdeOptions& opts);

}  // namespace mfc
