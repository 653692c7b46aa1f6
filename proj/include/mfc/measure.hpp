#pragma once

#include "mfc/types.hpp"

namespace mfc {

/// Moment statistics of an empirical law. Coefficients read the law only
/// through (mean, m2); the cloud pointer is kept for exact-law operations
/// such as validator probes.
struct MuStats {
  Vec mean;          // n
  double m2 = 0.0;   // average of |x|^2
  const Mat* cloud = nullptr;  // optional M x n sample handle
};

/// Uniformly weighted particle cloud at one time slice.
struct EmpiricalLaw {
  Mat points;  // M x n
  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

MuStats moment_stats(const EmpiricalLaw& law);

struct W2Result {
  double value = 0.0;
  bool exact = true;  // false when only the coupling upper bound was computed
};

/// Wasserstein-2 distance between equal-size uniform clouds.
/// n = 1: exact via sorted coupling. n > 1 and M <= 256: exact optimal
/// assignment. Larger clouds: identity-coupling upper bound after mean
/// alignment, flagged exact = false.
W2Result wasserstein2(const EmpiricalLaw& a, const EmpiricalLaw& b);

/// Exact minimum-cost assignment value for a square cost matrix
/// (Jonker-Volgenant shortest augmenting path). Exposed for tests.
double assignment_cost(const Mat& cost);

}  // namespace mfc
