#include "mfc/control_set.hpp"

#include <cmath>

namespace mfc {

ControlSet ControlSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || (hi - lo).minCoeff() < 0)
    throw SolverError("ControlSet::box: invalid bounds");
  ControlSet s;
  s.kind = Kind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

ControlSet ControlSet::ball(Vec center, double radius) {
  if (radius <= 0) throw SolverError("ControlSet::ball: radius must be positive");
  ControlSet s;
  s.kind = Kind::Ball;
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

ControlSet ControlSet::halfspace_intersection(std::vector<std::pair<Vec, double>> hs) {
  if (hs.empty()) throw SolverError("ControlSet: empty halfspace list");
  ControlSet s;
  s.kind = Kind::Halfspaces;
  s.halfspaces = std::move(hs);
  return s;
}

namespace {

Vec project_single_halfspace(const Vec& u, const Vec& a, double b) {
  const double viol = a.dot(u) - b;
  if (viol <= 0) return u;
  return u - (viol / a.squaredNorm()) * a;
}

// Dykstra's alternating projection; exact for a single halfspace and
// converges for any finite intersection.
Vec project_halfspaces(const Vec& u, const std::vector<std::pair<Vec, double>>& hs) {
  if (hs.size() == 1) return project_single_halfspace(u, hs[0].first, hs[0].second);
  Vec x = u;
  std::vector<Vec> corr(hs.size(), Vec::Zero(u.size()));
  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const Vec y = x + corr[i];
      const Vec xn = project_single_halfspace(y, hs[i].first, hs[i].second);
      corr[i] = y - xn;
      change += (xn - x).norm();
      x = xn;
    }
    if (change < 1e-14) break;
  }
  return x;
}

}  // namespace

Vec ControlSet::project(const Vec& u) const {
  switch (kind) {
    case Kind::All:
      return u;
    case Kind::Box:
      return u.cwiseMax(lo).cwiseMin(hi);
    case Kind::Ball: {
      const Vec diff = u - center;
      const double nrm = diff.norm();
      if (nrm <= radius) return u;
      return center + (radius / nrm) * diff;
    }
    case Kind::Halfspaces:
      return project_halfspaces(u, halfspaces);
    case Kind::Custom:
      if (!custom) throw SolverError("ControlSet: missing custom projection");
      return custom(u);
  }
  throw SolverError("ControlSet: unreachable");
}

bool ControlSet::contains(const Vec& u, double tol) const {
  return (project(u) - u).norm() <= tol;
}

}  // namespace mfc
