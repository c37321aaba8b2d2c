#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/value.hpp"

namespace mdr {

/// Z = U + L: lifts the shifted discounted value back to surface scale.
inline ValueVector z_from_u(const ValueVector& U, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("z_from_u: L must be > 0");
  for (double u : U)
    if (u > 0.0)
      throw std::invalid_argument("z_from_u: U must be nonpositive elementwise");
  ValueVector out(U.size(), 0.0, ValueRole::z_value);
  for (std::size_t i = 0; i < U.size(); ++i) out[i] = U[i] + L;
  return out;
}

struct ApproximationParams {
  double lambda = 0.0;   // discount rate, 1/time
  double tau_bar = 0.0;  // upper bound on the time-to-minimum
  double L = 0.0;        // clip bound

  void validate() const {
    if (!(lambda > 0.0) || !(tau_bar > 0.0) || !(L > 0.0))
      throw std::invalid_argument("ApproximationParams: lambda, tau_bar, L must be > 0");
  }
};

/// Level below which Z certifies membership in the reachable set:
/// {Z <= 0} is an under-approximation.
inline bool under_approx_membership(const ValueVector& Z, const GridSpec& grid,
                                    const std::vector<double>& x) {
  return interpolate(grid, Z, x) <= 0.0;
}

/// Over-approximation threshold L(1 - exp(-lambda*tau_bar)): everything the
/// reachable set can contain satisfies Z <= threshold.
inline double over_approx_threshold(const ApproximationParams& p) {
  p.validate();
  return p.L * (1.0 - std::exp(-p.lambda * p.tau_bar));
}

inline bool over_approx_membership(const ValueVector& Z, const GridSpec& grid,
                                   const ApproximationParams& p,
                                   const std::vector<double>& x) {
  return interpolate(grid, Z, x) <= over_approx_threshold(p);
}

// ---------------------------------------------------------------------------
// Contour extraction (marching squares with linear edge crossings).
// ---------------------------------------------------------------------------

struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

namespace detail {

// A 2D lattice view with physical coordinates; values are fetched through
// an index map so both plain 2D grids and slices of 3D grids fit.
struct Lattice2D {
  int n0 = 0, n1 = 0;
  std::vector<double> c0, c1;     // node coordinates per plane axis
  std::vector<double> vals;       // n0*n1, axis0 slowest

  double v(int i, int j) const { return vals[std::size_t(i) * n1 + j]; }
};

inline std::vector<Polyline> marching_squares(const Lattice2D& lat, double level) {
  const int n0 = lat.n0, n1 = lat.n1;
  auto inside = [&](int i, int j) { return lat.v(i, j) < level; };

  // Crossing points live on lattice edges; matching segment endpoints by
  // edge id (not by coordinates) keeps the joins exact.
  // Edge ids: axis0 edge (i,j)-(i+1,j) -> 2*(i*n1+j); axis1 edge
  // (i,j)-(i,j+1) -> 2*(i*n1+j)+1.
  auto e0 = [&](int i, int j) { return std::int64_t(2) * (std::int64_t(i) * n1 + j); };
  auto e1 = [&](int i, int j) { return std::int64_t(2) * (std::int64_t(i) * n1 + j) + 1; };

  std::map<std::int64_t, std::array<double, 2>> crossing;
  auto cross_pt = [&](double va, double vb, double ca, double cb) {
    const double tau = (level - va) / (vb - va);
    return ca + tau * (cb - ca);
  };
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      if (i + 1 < n0 && inside(i, j) != inside(i + 1, j))
        crossing[e0(i, j)] = {cross_pt(lat.v(i, j), lat.v(i + 1, j), lat.c0[i], lat.c0[i + 1]),
                              lat.c1[j]};
      if (j + 1 < n1 && inside(i, j) != inside(i, j + 1))
        crossing[e1(i, j)] = {lat.c0[i],
                              cross_pt(lat.v(i, j), lat.v(i, j + 1), lat.c1[j], lat.c1[j + 1])};
    }

  // Segments per cell; the saddle configurations are resolved by the cell
  // average rule (the center's interpolated value decides connectivity).
  std::vector<std::array<std::int64_t, 2>> segments;
  for (int i = 0; i + 1 < n0; ++i)
    for (int j = 0; j + 1 < n1; ++j) {
      const int sw = inside(i, j), se = inside(i + 1, j);
      const int ne = inside(i + 1, j + 1), nw = inside(i, j + 1);
      const int config = sw | (se << 1) | (ne << 2) | (nw << 3);
      if (config == 0 || config == 15) continue;
      const std::int64_t south = e0(i, j), north = e0(i, j + 1);
      const std::int64_t west = e1(i, j), east = e1(i + 1, j);
      switch (config) {
        case 1:  case 14: segments.push_back({south, west}); break;
        case 2:  case 13: segments.push_back({south, east}); break;
        case 3:  case 12: segments.push_back({west, east}); break;
        case 4:  case 11: segments.push_back({east, north}); break;
        case 6:  case 9:  segments.push_back({south, north}); break;
        case 8:  case 7:  segments.push_back({west, north}); break;
        case 5: case 10: {
          const double center = 0.25 * (lat.v(i, j) + lat.v(i + 1, j) +
                                        lat.v(i + 1, j + 1) + lat.v(i, j + 1));
          const bool center_inside = center < level;
          // A center on the inside connects the inside corners, so the
          // contour cuts off the other two corners, and vice versa.
          const bool cut_sw_ne = (config == 10) == center_inside;
          if (cut_sw_ne) {
            segments.push_back({south, west});   // around SW
            segments.push_back({east, north});   // around NE
          } else {
            segments.push_back({south, east});   // around SE
            segments.push_back({west, north});   // around NW
          }
          break;
        }
        default: break;
      }
    }

  // Join segments into chains: each crossing touches at most two segments.
  std::map<std::int64_t, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge[segments[s][0]].push_back(s);
    by_edge[segments[s][1]].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> out;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    std::vector<std::int64_t> chain = {segments[s0][0], segments[s0][1]};
    used[s0] = true;
    // extend forward then backward
    for (int dir = 0; dir < 2; ++dir) {
      while (true) {
        const std::int64_t tip = dir == 0 ? chain.back() : chain.front();
        std::size_t next = segments.size();
        for (std::size_t cand : by_edge[tip])
          if (!used[cand]) { next = cand; break; }
        if (next == segments.size()) break;
        used[next] = true;
        const std::int64_t other =
            segments[next][0] == tip ? segments[next][1] : segments[next][0];
        if (dir == 0)
          chain.push_back(other);
        else
          chain.insert(chain.begin(), other);
      }
    }
    Polyline pl;
    pl.closed = chain.size() > 2 && chain.front() == chain.back();
    if (pl.closed) chain.pop_back();
    pl.points.reserve(chain.size() + (pl.closed ? 1 : 0));
    for (std::int64_t e : chain) pl.points.push_back(crossing.at(e));
    if (pl.closed) pl.points.push_back(pl.points.front());
    out.push_back(std::move(pl));
  }
  return out;
}

}  // namespace detail

/// Polylines where the bilinear interpolant of a 2D grid crosses `level`.
inline std::vector<Polyline> extract_contour(const GridSpec& grid,
                                             const ValueVector& values, double level) {
  if (grid.dim() != 2)
    throw std::invalid_argument("extract_contour: grid must be 2D (use the slice overload)");
  if (values.size() != grid.size())
    throw std::invalid_argument("extract_contour: value vector length mismatch");
  detail::Lattice2D lat;
  lat.n0 = grid.nodes(0);
  lat.n1 = grid.nodes(1);
  for (int i = 0; i < lat.n0; ++i) lat.c0.push_back(grid.lower(0) + i * grid.spacing(0));
  for (int j = 0; j < lat.n1; ++j) lat.c1.push_back(grid.lower(1) + j * grid.spacing(1));
  lat.vals = values.v;
  return detail::marching_squares(lat, level);
}

/// Contour of a 2D slice of a 3D grid: slice_axis is held at slice_index and
/// the remaining two axes (in increasing order) become the plane.
inline std::vector<Polyline> extract_contour_slice(const GridSpec& grid,
                                                   const ValueVector& values,
                                                   int slice_axis, int slice_index,
                                                   double level) {
  if (grid.dim() != 3)
    throw std::invalid_argument("extract_contour_slice: grid must be 3D");
  if (values.size() != grid.size())
    throw std::invalid_argument("extract_contour_slice: value vector length mismatch");
  if (slice_axis < 0 || slice_axis >= 3)
    throw std::invalid_argument("extract_contour_slice: slice axis out of range");
  if (slice_index < 0 || slice_index >= grid.nodes(slice_axis))
    throw std::invalid_argument("extract_contour_slice: slice index out of range");
  int axes[2], k = 0;
  for (int j = 0; j < 3; ++j)
    if (j != slice_axis) axes[k++] = j;

  detail::Lattice2D lat;
  lat.n0 = grid.nodes(axes[0]);
  lat.n1 = grid.nodes(axes[1]);
  for (int i = 0; i < lat.n0; ++i)
    lat.c0.push_back(grid.lower(axes[0]) + i * grid.spacing(axes[0]));
  for (int j = 0; j < lat.n1; ++j)
    lat.c1.push_back(grid.lower(axes[1]) + j * grid.spacing(axes[1]));
  lat.vals.resize(std::size_t(lat.n0) * lat.n1);
  int mi[3];
  mi[slice_axis] = slice_index;
  for (int i = 0; i < lat.n0; ++i)
    for (int j = 0; j < lat.n1; ++j) {
      mi[axes[0]] = i;
      mi[axes[1]] = j;
      lat.vals[std::size_t(i) * lat.n1 + j] = values[grid.linear_index(mi)];
    }
  return detail::marching_squares(lat, level);
}

/// Closed-form safe set of the double integrator keeping inside the box
/// K = [a1,b1]x[a2,b2] with |u| <= u_max: the state must be in K and the
/// maximal-braking parabola must stop before the wall in the direction of
/// travel. A positive margin shrinks the set, a negative margin relaxes it.
inline bool di_analytic_safe(const std::vector<double>& x, double u_max,
                             const std::vector<double>& k_lower,
                             const std::vector<double>& k_upper, double margin = 0.0) {
  if (!(u_max > 0.0)) throw std::invalid_argument("di_analytic_safe: u_max must be > 0");
  if (x.size() != 2 || k_lower.size() != 2 || k_upper.size() != 2)
    throw std::invalid_argument("di_analytic_safe: expects 2D state and box");
  const double x1 = x[0], x2 = x[1];
  if (x1 < k_lower[0] + margin || x1 > k_upper[0] - margin) return false;
  if (x2 < k_lower[1] + margin || x2 > k_upper[1] - margin) return false;
  if (x2 > 0.0 && x1 + x2 * x2 / (2.0 * u_max) > k_upper[0] - margin) return false;
  if (x2 < 0.0 && x1 - x2 * x2 / (2.0 * u_max) < k_lower[0] + margin) return false;
  return true;
}

}  // namespace mdr
