#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/models.hpp"
#include "mdr/value.hpp"

namespace mdr {

/// One sampled state transition x -> x(dt) of an autonomous (fixed-policy)
/// system.
struct Transition {
  std::vector<double> x;
  std::vector<double> x_next;
  double dt = 0.0;
};

struct TDConfig {
  enum class Alpha { visit_decay, constant };
  Alpha schedule = Alpha::visit_decay;
  double alpha = 1.0;      // used when schedule == constant; must be in [0,1]
  double gamma = 0.0;      // exp(-lambda*dt)
  int passes = 1;
  bool shuffle = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0.0) || !(gamma < 1.0))
      throw std::invalid_argument("TDConfig: gamma must be in (0,1)");
    if (schedule == Alpha::constant && (alpha < 0.0 || alpha > 1.0))
      throw std::invalid_argument("TDConfig: alpha must be in [0,1]");
    if (passes < 0) throw std::invalid_argument("TDConfig: passes must be >= 0");
  }
};

namespace detail {

inline std::size_t nearest_node(const GridSpec& grid, const double* x) {
  int mi[kMaxDim];
  for (int j = 0; j < grid.dim(); ++j) {
    int i0;
    double t;
    grid.axis_locate(j, x[j], i0, t);
    mi[j] = t <= 0.5 ? i0 : grid.axis_upper(j, i0);
  }
  return grid.linear_index(mi);
}

}  // namespace detail

/// One stochastic update of the grid-interpolant value parameters toward the
/// discounted-minimum target:
///   target = min{ h(x), gamma * theta(x_next) }
///   theta += alpha * (target - theta(x)) * interp_weights(x)
/// The gradient of the interpolant w.r.t. the node parameters is exactly the
/// weight row, so at most 2^n entries change.
template <class HFn>
void td_update_mdr(const GridSpec& grid, std::vector<double>& theta,
                   const Transition& sample, HFn&& h_fn, double gamma, double alpha) {
  if (theta.size() != grid.size())
    throw std::invalid_argument("td_update_mdr: theta length mismatch");
  ValueVector view;  // borrow theta for interpolation without copying
  view.v.swap(theta);
  const double pred = interpolate(grid, view, sample.x);
  const double next = interpolate(grid, view, sample.x_next);
  view.v.swap(theta);
  const double target = std::min(h_fn(sample.x), gamma * next);
  const double delta = target - pred;
  for (const auto& e : interp_weights(grid, sample.x).entries)
    theta[static_cast<std::size_t>(e.index)] += alpha * delta * e.weight;
}

/// The sum-of-discounted-rewards baseline the discounted-minimum rule
/// modifies: target = dt * r(x) + gamma * theta(x_next). The dt scaling
/// matches the discrete-time backup so both share fixed points.
template <class RFn>
void td_update_sdr(const GridSpec& grid, std::vector<double>& theta,
                   const Transition& sample, RFn&& r_fn, double gamma, double alpha) {
  if (theta.size() != grid.size())
    throw std::invalid_argument("td_update_sdr: theta length mismatch");
  ValueVector view;
  view.v.swap(theta);
  const double pred = interpolate(grid, view, sample.x);
  const double next = interpolate(grid, view, sample.x_next);
  view.v.swap(theta);
  const double target = sample.dt * r_fn(sample.x) + gamma * next;
  const double delta = target - pred;
  for (const auto& e : interp_weights(grid, sample.x).entries)
    theta[static_cast<std::size_t>(e.index)] += alpha * delta * e.weight;
}

/// Euler rollout of a fixed policy; states are kept inside the grid domain
/// (clamped on non-periodic axes, wrapped on periodic ones), matching the
/// solver's boundary rule.
template <class PolicyFn>
std::vector<Transition> rollout(const SystemModel& model, PolicyFn&& policy,
                                const std::vector<double>& x0, double dt,
                                int horizon_steps, const GridSpec& grid) {
  if (model.two_player())
    throw std::invalid_argument("rollout: one-player models only");
  if (!(dt > 0.0)) throw std::invalid_argument("rollout: dt must be > 0");
  if (horizon_steps < 0) throw std::invalid_argument("rollout: negative horizon");

  auto project = [&grid](std::vector<double> x) {
    for (int j = 0; j < grid.dim(); ++j) {
      if (grid.periodic(j)) {
        const double period = grid.upper(j) - grid.lower(j);
        double y = std::fmod(x[j] - grid.lower(j), period);
        if (y < 0.0) y += period;
        x[j] = grid.lower(j) + y;
      } else {
        x[j] = std::clamp(x[j], grid.lower(j), grid.upper(j));
      }
    }
    return x;
  };

  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(horizon_steps));
  std::vector<double> x = project(x0);
  for (int k = 0; k < horizon_steps; ++k) {
    const double u = policy(x);
    std::vector<double> next = project(euler_step(model, x, &u, nullptr, dt));
    out.push_back({x, next, dt});
    x = std::move(next);
  }
  return out;
}

struct TDResult {
  std::vector<double> theta;
  std::vector<double> curve;  // per epoch: gap to reference, or step size when absent
};

/// Epoch loop over td_update_mdr. With a reference vector the learning curve
/// records ||theta - reference||_inf per epoch; otherwise the largest
/// parameter change of the epoch.
template <class HFn>
TDResult td_train(const GridSpec& grid, const std::vector<Transition>& samples,
                  HFn&& h_fn, const TDConfig& cfg, std::vector<double> theta0,
                  const std::vector<double>* reference = nullptr) {
  cfg.validate();
  if (samples.empty()) throw std::invalid_argument("td_train: empty sample stream");
  if (theta0.size() != grid.size())
    throw std::invalid_argument("td_train: theta0 length mismatch");

  TDResult out;
  out.theta = std::move(theta0);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::int64_t> visits(grid.size(), 0);
  std::vector<double> prev;

  for (int epoch = 0; epoch < cfg.passes; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    prev = out.theta;
    for (std::size_t s : order) {
      const Transition& tr = samples[s];
      double alpha = cfg.alpha;
      if (cfg.schedule == TDConfig::Alpha::visit_decay) {
        const std::size_t nn = detail::nearest_node(grid, tr.x.data());
        alpha = 1.0 / (1.0 + double(visits[nn]));
        ++visits[nn];
      }
      td_update_mdr(grid, out.theta, tr, h_fn, cfg.gamma, alpha);
    }
    out.curve.push_back(reference ? inf_norm_diff(out.theta, *reference)
                                  : inf_norm_diff(out.theta, prev));
  }
  return out;
}

}  // namespace mdr
