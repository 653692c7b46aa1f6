#pragma once

#include "mfc/types.hpp"

namespace mfc {

/// Closed convex policy set with an exact Euclidean projection.
/// Boxes, balls and halfspace intersections are handled natively;
/// anything else goes through a user callback.
struct ControlSet {
  enum class Kind { All, Box, Ball, Halfspaces, Custom };

  Kind kind = Kind::All;
  Vec lo, hi;              // Box
  Vec center;              // Ball
  double radius = 0.0;     // Ball
  std::vector<std::pair<Vec, double>> halfspaces;  // a . u <= b
  std::function<Vec(const Vec&)> custom;

  static ControlSet all() { return ControlSet{}; }
  static ControlSet box(Vec lo, Vec hi);
  static ControlSet ball(Vec center, double radius);
  static ControlSet halfspace_intersection(std::vector<std::pair<Vec, double>> hs);

  Vec project(const Vec& u) const;
  bool contains(const Vec& u, double tol = 1e-9) const;
};

}  // namespace mfc
