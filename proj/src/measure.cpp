#include "mfc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfc {

MuStats moment_stats(const EmpiricalLaw& law) {
  if (law.size() < 1) throw SolverError("moment_stats: empty cloud");
  if (!all_finite(law.points)) throw SolverError("moment_stats: non-finite points");
  MuStats s;
  s.mean = law.points.colwise().mean();
  s.m2 = law.points.rowwise().squaredNorm().mean();
  s.cloud = &law.points;
  return s;
}

double assignment_cost(const Mat& cost) {
  // Jonker-Volgenant style shortest augmenting path, O(M^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw SolverError("assignment_cost: matrix not square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

W2Result wasserstein2(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  const int m = a.size();
  const int n = a.dim();
  if (b.dim() != n) throw SolverError("wasserstein2: dimension mismatch");
  W2Result res;
  if (n == 1) {
    if (b.size() != m) throw SolverError("wasserstein2: cardinality mismatch for exact mode");
    std::vector<double> xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
      xs[i] = a.points(i, 0);
      ys[i] = b.points(i, 0);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = xs[i] - ys[i];
      acc += d * d;
    }
    res.value = std::sqrt(acc / m);
    res.exact = true;
    return res;
  }
  if (m <= 256) {
    if (b.size() != m) throw SolverError("wasserstein2: cardinality mismatch for exact mode");
    Mat cost(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        cost(i, j) = (a.points.row(i) - b.points.row(j)).squaredNorm();
    res.value = std::sqrt(assignment_cost(cost) / m);
    res.exact = true;
    return res;
  }
  // Coupling upper bound: align means, pair row i with row i.
  if (b.size() != m) throw SolverError("wasserstein2: cardinality mismatch");
  const Vec ma = a.points.colwise().mean();
  const Vec mb = b.points.colwise().mean();
  double acc = 0.0;
  for (int i = 0; i < m; ++i)
    acc += (a.points.row(i) - ma.transpose() - b.points.row(i) + mb.transpose()).squaredNorm();
  res.value = std::sqrt(acc / m + (ma - mb).squaredNorm());
  res.exact = false;
  return res;
}

}  // namespace mfc
