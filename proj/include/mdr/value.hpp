#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdr {

/// What a node-value vector represents. Purely informational: operations
/// validate sizes and numeric contracts, not roles, but reports and dumps
/// carry the tag so provenance survives a round trip.
enum class ValueRole {
  generic,
  surface,         // l: clipped signed distance to the target
  shifted_reward,  // h = l - L, nonpositive everywhere
  reward,          // r: running reward for sum-of-discounted-rewards
  mr_value,        // V: minimum-reward value
  mdr_shifted,     // U = Z - L: shifted minimum-discounted-reward value
  sdr_value,       // sum-of-discounted-rewards value
  z_value,         // Z = U + L
};

inline std::string to_string(ValueRole r) {
  switch (r) {
    case ValueRole::surface: return "surface";
    case ValueRole::shifted_reward: return "shifted_reward";
    case ValueRole::reward: return "reward";
    case ValueRole::mr_value: return "mr_value";
    case ValueRole::mdr_shifted: return "mdr_shifted";
    case ValueRole::sdr_value: return "sdr_value";
    case ValueRole::z_value: return "z_value";
    default: return "generic";
  }
}

/// One value per grid node, in row-major node order.
struct ValueVector {
  std::vector<double> v;
  ValueRole role = ValueRole::generic;

  ValueVector() = default;
  ValueVector(std::size_t n, double fill, ValueRole r = ValueRole::generic)
      : v(n, fill), role(r) {}
  ValueVector(std::vector<double> values, ValueRole r = ValueRole::generic)
      : v(std::move(values)), role(r) {}
  ValueVector(std::initializer_list<double> values, ValueRole r = ValueRole::generic)
      : v(values), role(r) {}

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  auto begin() { return v.begin(); }
  auto end() { return v.end(); }
  auto begin() const { return v.begin(); }
  auto end() const { return v.end(); }
};

inline double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

inline double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("inf_norm_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double one_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("one_norm_diff: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace mdr
