#pragma once

#include <array>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/value.hpp"

namespace mdr {

/// Hard cap on the state dimension; keeps interpolation buffers on the stack.
inline constexpr int kMaxDim = 8;

/// Tensor-product interpolation weights at a query point: at most 2^n
/// (node, weight) entries with nonnegative weights summing to 1.
struct WeightRow {
  struct Entry {
    std::int64_t index;
    double weight;
  };
  std::vector<Entry> entries;

  double sum() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight;
    return s;
  }
};

namespace detail {

// a + t*(b-a): for a == b the result is exactly a, which the backup
// operators rely on (constant vectors must survive a sweep bit-identically).
inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Snap tolerance for cell coordinates: absorbs the rounding of
// node_coords followed by the inverse map, so querying exactly at a node
// yields frac == 0 and the node value is reproduced exactly.
inline constexpr double kSnapTol = 64.0 * DBL_EPSILON;

// Weights smaller than this are dropped from the row and the remainder is
// renormalized; keeps rows sparse without breaking stochasticity.
inline constexpr double kWeightDrop = 1e-15;

}  // namespace detail

/// Regular equidistant grid over a rectangular domain. Axes may be periodic,
/// in which case the upper endpoint is identified with the lower one and the
/// spacing is (upper-lower)/N instead of (upper-lower)/(N-1).
///
/// Node linearization is row-major with axis 0 slowest.
class GridSpec {
 public:
  GridSpec(std::vector<double> lower, std::vector<double> upper,
           std::vector<int> nodes_per_axis, std::vector<std::uint8_t> periodic = {})
      : lower_(std::move(lower)),
        upper_(std::move(upper)),
        nodes_(std::move(nodes_per_axis)),
        periodic_(std::move(periodic)) {
    const std::size_t n = lower_.size();
    if (n == 0 || n > static_cast<std::size_t>(kMaxDim))
      throw std::invalid_argument("GridSpec: dimension must be in [1, " +
                                  std::to_string(kMaxDim) + "]");
    if (upper_.size() != n || nodes_.size() != n)
      throw std::invalid_argument("GridSpec: lower/upper/nodes size mismatch");
    if (periodic_.empty()) periodic_.assign(n, 0);
    if (periodic_.size() != n)
      throw std::invalid_argument("GridSpec: periodic flag size mismatch");

    dx_.resize(n);
    inv_dx_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(lower_[j] < upper_[j]))
        throw std::invalid_argument("GridSpec: lower must be < upper on axis " +
                                    std::to_string(j));
      if (nodes_[j] < 2)
        throw std::invalid_argument("GridSpec: need at least 2 nodes per axis");
      const double denom = periodic_[j] ? double(nodes_[j]) : double(nodes_[j] - 1);
      dx_[j] = (upper_[j] - lower_[j]) / denom;
      inv_dx_[j] = 1.0 / dx_[j];
    }

    strides_.resize(n);
    std::size_t total = 1;
    for (std::size_t j = n; j-- > 0;) {
      strides_[j] = static_cast<std::int64_t>(total);
      total *= static_cast<std::size_t>(nodes_[j]);
      if (total > (std::size_t(1) << 62))
        throw std::invalid_argument("GridSpec: node count overflows index range");
    }
    size_ = total;
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  std::size_t size() const { return size_; }
  int nodes(int j) const { return nodes_[j]; }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  bool periodic(int j) const { return periodic_[j] != 0; }
  double spacing(int j) const { return dx_[j]; }
  std::int64_t stride(int j) const { return strides_[j]; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<std::uint8_t>& periodic() const { return periodic_; }

  double min_spacing() const {
    double m = dx_[0];
    for (double d : dx_) m = std::min(m, d);
    return m;
  }

  bool same_domain(const GridSpec& o) const {
    if (dim() != o.dim()) return false;
    for (int j = 0; j < dim(); ++j)
      if (lower_[j] != o.lower_[j] || upper_[j] != o.upper_[j] ||
          periodic_[j] != o.periodic_[j])
        return false;
    return true;
  }

  bool operator==(const GridSpec& o) const {
    return same_domain(o) && nodes_ == o.nodes_;
  }

  void multi_index(std::size_t i, int* out) const {
    for (int j = 0; j < dim(); ++j) {
      out[j] = static_cast<int>(i / static_cast<std::size_t>(strides_[j]));
      i %= static_cast<std::size_t>(strides_[j]);
    }
  }

  std::size_t linear_index(const int* mi) const {
    std::size_t i = 0;
    for (int j = 0; j < dim(); ++j)
      i += static_cast<std::size_t>(mi[j]) * static_cast<std::size_t>(strides_[j]);
    return i;
  }

  void node_coords_into(std::size_t i, double* out) const {
    if (i >= size_) throw std::out_of_range("node_coords: index out of range");
    int mi[kMaxDim];
    multi_index(i, mi);
    for (int j = 0; j < dim(); ++j) out[j] = lower_[j] + mi[j] * dx_[j];
  }

  std::vector<double> node_coords(std::size_t i) const {
    std::vector<double> x(dim());
    node_coords_into(i, x.data());
    return x;
  }

  /// Per-axis cell location: node pair (i0, i0+1 wrapped/clamped) and the
  /// fractional offset t in [0,1). Non-periodic axes clamp out-of-domain
  /// coordinates to the boundary; periodic axes wrap modulo the period.
  void axis_locate(int j, double x, int& i0, double& t) const {
    const int n = nodes_[j];
    double s = (x - lower_[j]) * inv_dx_[j];
    if (periodic_[j]) {
      s = std::fmod(s, double(n));
      if (s < 0.0) s += double(n);
      const double r = std::nearbyint(s);
      if (std::fabs(s - r) <= detail::kSnapTol * std::max(1.0, std::fabs(s))) s = r;
      if (s >= double(n)) s -= double(n);
      i0 = static_cast<int>(s);
      if (i0 >= n) i0 = 0;  // guards s == n after rounding
      t = s - double(i0);
    } else {
      const double r = std::nearbyint(s);
      if (std::fabs(s - r) <= detail::kSnapTol * std::max(1.0, std::fabs(s))) s = r;
      if (s <= 0.0) {
        i0 = 0;
        t = 0.0;
        return;
      }
      if (s >= double(n - 1)) {
        i0 = n - 1;
        t = 0.0;
        return;
      }
      i0 = static_cast<int>(s);
      t = s - double(i0);
    }
  }

  /// Upper cell neighbor along axis j; collapses to i0 at a non-periodic
  /// upper boundary (where t is 0 by construction).
  int axis_upper(int j, int i0) const {
    int i1 = i0 + 1;
    if (i1 == nodes_[j]) i1 = periodic_[j] ? 0 : i0;
    return i1;
  }

  void locate(const double* x, int* i0, double* t) const {
    for (int j = 0; j < dim(); ++j) axis_locate(j, x[j], i0[j], t[j]);
  }

  /// Multilinear evaluation from a located cell, by nested lerp along each
  /// axis. Evaluating at a node (all t == 0) returns that node's value
  /// bit-exactly, and constant vectors are preserved bit-exactly.
  double lerp_gather(const int* i0, const double* t, const double* values) const {
    const int n = dim();
    std::int64_t lo_off[kMaxDim], hi_off[kMaxDim];
    for (int j = 0; j < n; ++j) {
      lo_off[j] = i0[j] * strides_[j];
      hi_off[j] = axis_upper(j, i0[j]) * strides_[j];
    }
    double acc[std::size_t(1) << kMaxDim];
    const int corners = 1 << n;
    for (int k = 0; k < corners; ++k) {
      std::int64_t idx = 0;
      for (int j = 0; j < n; ++j)
        idx += ((k >> (n - 1 - j)) & 1) ? hi_off[j] : lo_off[j];
      acc[k] = values[idx];
    }
    // Fold the last axis first (it is the least significant corner bit).
    for (int j = n - 1; j >= 0; --j) {
      const int pairs = 1 << j;
      for (int p = 0; p < pairs; ++p)
        acc[p] = detail::lerp(acc[2 * p], acc[2 * p + 1], t[n - 1 - j]);
    }
    return acc[0];
  }

 private:
  std::vector<double> lower_, upper_;
  std::vector<int> nodes_;
  std::vector<std::uint8_t> periodic_;
  std::vector<double> dx_, inv_dx_;
  std::vector<std::int64_t> strides_;
  std::size_t size_ = 0;
};

/// State-space coordinates of node i (row-major decode, axis 0 slowest).
inline std::vector<double> node_coords(const GridSpec& grid, std::size_t i) {
  return grid.node_coords(i);
}

/// Multilinear interpolation weights of the cell containing x. Out-of-domain
/// coordinates are clamped (non-periodic) or wrapped (periodic). Weights
/// below 1e-15 are dropped and the remainder renormalized.
inline WeightRow interp_weights(const GridSpec& grid, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != grid.dim())
    throw std::invalid_argument("interp_weights: point dimension mismatch");
  const int n = grid.dim();
  int i0[kMaxDim];
  double t[kMaxDim];
  grid.locate(x.data(), i0, t);

  WeightRow row;
  row.entries.reserve(std::size_t(1) << n);
  const int corners = 1 << n;
  double kept_sum = 0.0;
  bool dropped = false;
  for (int k = 0; k < corners; ++k) {
    double w = 1.0;
    std::int64_t idx = 0;
    for (int j = 0; j < n; ++j) {
      const bool hi = ((k >> (n - 1 - j)) & 1) != 0;
      w *= hi ? t[j] : (1.0 - t[j]);
      const int node = hi ? grid.axis_upper(j, i0[j]) : i0[j];
      idx += node * grid.stride(j);
    }
    if (w < detail::kWeightDrop) {
      dropped = true;
      continue;
    }
    row.entries.push_back({idx, w});
    kept_sum += w;
  }
  if (dropped && !row.entries.empty()) {
    for (auto& e : row.entries) e.weight /= kept_sum;
  }
  return row;
}

/// Multilinear interpolant of a node-value vector at x.
inline double interpolate(const GridSpec& grid, const ValueVector& values,
                          const std::vector<double>& x) {
  if (values.size() != grid.size())
    throw std::invalid_argument("interpolate: value vector length mismatch");
  if (static_cast<int>(x.size()) != grid.dim())
    throw std::invalid_argument("interpolate: point dimension mismatch");
  int i0[kMaxDim];
  double t[kMaxDim];
  grid.locate(x.data(), i0, t);
  return grid.lerp_gather(i0, t, values.data());
}

/// Halved-resolution grid on the same domain: every other node with the
/// endpoints kept on non-periodic axes, plain halving on periodic axes.
inline GridSpec coarsen(const GridSpec& grid) {
  std::vector<int> nodes(grid.dim());
  for (int j = 0; j < grid.dim(); ++j) {
    if (grid.nodes(j) < 3)
      throw std::invalid_argument("coarsen: axis " + std::to_string(j) +
                                  " too small to coarsen");
    nodes[j] = grid.periodic(j) ? grid.nodes(j) / 2 : (grid.nodes(j) + 1) / 2;
    if (nodes[j] < 2)
      throw std::invalid_argument("coarsen: axis " + std::to_string(j) +
                                  " too small to coarsen");
  }
  return GridSpec(grid.lower(), grid.upper(), nodes, grid.periodic());
}

/// Transfer a coarse-grid vector to a finer grid on the same domain by
/// interpolating at every fine node.
inline ValueVector prolong(const ValueVector& coarse_values, const GridSpec& coarse,
                           const GridSpec& fine) {
  if (!coarse.same_domain(fine))
    throw std::invalid_argument("prolong: grids do not share a domain");
  if (coarse_values.size() != coarse.size())
    throw std::invalid_argument("prolong: value vector length mismatch");
  ValueVector out(fine.size(), 0.0, coarse_values.role);
  double x[kMaxDim];
  int i0[kMaxDim];
  double t[kMaxDim];
  for (std::size_t i = 0; i < fine.size(); ++i) {
    fine.node_coords_into(i, x);
    coarse.locate(x, i0, t);
    out[i] = coarse.lerp_gather(i0, t, coarse_values.data());
  }
  return out;
}

}  // namespace mdr
