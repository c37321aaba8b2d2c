#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/value.hpp"

namespace mdr {

/// Target-set geometry. The target is the sub-zero level set of the surface
/// function l, i.e. l(x) < 0 inside the target.
///
///  - box_complement: the target is everything outside the box [lower, upper]
///    (keep-inside tasks). s_T is the negated Euclidean signed distance of
///    the box.
///  - cylinder: the target is the disk x_{j1}^2 + x_{j2}^2 < R^2 extruded
///    along the remaining axes (capture sets).
struct TargetSpec {
  enum class Shape { box_complement, cylinder };

  Shape shape = Shape::box_complement;
  std::vector<double> box_lower, box_upper;  // box_complement
  double radius = 0.0;                       // cylinder
  int axis1 = 0, axis2 = 1;                  // cylinder plane
  std::optional<double> clip_bound;          // empty = auto (max |s_T| over grid nodes)

  static TargetSpec make_box_complement(std::vector<double> lo, std::vector<double> hi,
                                        std::optional<double> clip = std::nullopt) {
    TargetSpec s;
    s.shape = Shape::box_complement;
    s.box_lower = std::move(lo);
    s.box_upper = std::move(hi);
    s.clip_bound = clip;
    if (s.box_lower.size() != s.box_upper.size())
      throw std::invalid_argument("TargetSpec: box bounds size mismatch");
    for (std::size_t j = 0; j < s.box_lower.size(); ++j)
      if (!(s.box_lower[j] < s.box_upper[j]))
        throw std::invalid_argument("TargetSpec: box lower must be < upper");
    return s;
  }

  static TargetSpec make_cylinder(double radius, int axis1, int axis2,
                                  std::optional<double> clip = std::nullopt) {
    TargetSpec s;
    s.shape = Shape::cylinder;
    s.radius = radius;
    s.axis1 = axis1;
    s.axis2 = axis2;
    s.clip_bound = clip;
    if (!(radius > 0.0)) throw std::invalid_argument("TargetSpec: radius must be > 0");
    if (axis1 == axis2 || axis1 < 0 || axis2 < 0)
      throw std::invalid_argument("TargetSpec: cylinder axes must be distinct and valid");
    return s;
  }
};

/// Signed distance to the target set: negative inside, positive outside.
inline double signed_distance(const TargetSpec& spec, const double* x, int dim) {
  switch (spec.shape) {
    case TargetSpec::Shape::box_complement: {
      // Euclidean signed distance of the box, negated: inside the box the
      // distance to its complement is the nearest face distance.
      const auto& lo = spec.box_lower;
      const auto& hi = spec.box_upper;
      if (static_cast<int>(lo.size()) > dim)
        throw std::invalid_argument("signed_distance: box dimension exceeds point");
      double outside_sq = 0.0;
      double inside = std::numeric_limits<double>::infinity();
      bool is_outside = false;
      for (std::size_t j = 0; j < lo.size(); ++j) {
        const double below = lo[j] - x[j];
        const double above = x[j] - hi[j];
        const double d = std::max(below, above);
        if (d > 0.0) {
          is_outside = true;
          outside_sq += d * d;
        } else {
          inside = std::min(inside, -d);
        }
      }
      const double s_box = is_outside ? std::sqrt(outside_sq) : -inside;
      return -s_box;
    }
    case TargetSpec::Shape::cylinder: {
      if (spec.axis1 >= dim || spec.axis2 >= dim)
        throw std::invalid_argument("signed_distance: cylinder axis out of range");
      return std::hypot(x[spec.axis1], x[spec.axis2]) - spec.radius;
    }
  }
  throw std::logic_error("signed_distance: unknown shape");
}

inline double signed_distance(const TargetSpec& spec, const std::vector<double>& x) {
  return signed_distance(spec, x.data(), static_cast<int>(x.size()));
}

/// The clip bound L: either the configured value or, for auto, the largest
/// |s_T| over the grid nodes (so |l| <= L holds with equality attained).
inline double clip_bound(const TargetSpec& spec, const GridSpec& grid) {
  if (spec.clip_bound) {
    if (!(*spec.clip_bound > 0.0))
      throw std::invalid_argument("clip_bound: L must be positive");
    return *spec.clip_bound;
  }
  double m = 0.0;
  double x[kMaxDim];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_coords_into(i, x);
    m = std::max(m, std::fabs(signed_distance(spec, x, grid.dim())));
  }
  if (!(m > 0.0))
    throw std::invalid_argument("clip_bound: auto L is not positive on this grid");
  return m;
}

/// l at every node: the signed distance clipped to [-L, L].
inline ValueVector l_vector(const TargetSpec& spec, const GridSpec& grid) {
  const double L = clip_bound(spec, grid);
  ValueVector out(grid.size(), 0.0, ValueRole::surface);
  double x[kMaxDim];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_coords_into(i, x);
    out[i] = std::clamp(signed_distance(spec, x, grid.dim()), -L, L);
  }
  return out;
}

/// h = l - L at every node; nonpositive with range [-2L, 0].
inline ValueVector h_vector(const TargetSpec& spec, const GridSpec& grid) {
  const double L = clip_bound(spec, grid);
  ValueVector out(grid.size(), 0.0, ValueRole::shifted_reward);
  double x[kMaxDim];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_coords_into(i, x);
    out[i] = std::clamp(signed_distance(spec, x, grid.dim()), -L, L) - L;
  }
  return out;
}

}  // namespace mdr
