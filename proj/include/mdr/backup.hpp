#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/models.hpp"
#include "mdr/parallel.hpp"
#include "mdr/value.hpp"

namespace mdr {

/// Per-node input choices: control index per node, disturbance index per
/// node (empty in one-player problems).
struct PolicyPair {
  std::vector<std::int32_t> control;
  std::vector<std::int32_t> disturbance;
};

/// Interpolation stencils of the Euler successor x_i + dt*f(x_i, u_a, d_b)
/// for every (node, control, disturbance) triple, plus the discount factor
/// gamma = exp(-lambda*dt).
///
/// Two execution modes with bit-identical results:
///  - Precomputed: stencils (cell base index + per-axis fraction) are
///    materialized once; sweeps are memory-bound.
///  - OnTheFly: stencils are recomputed per evaluation; sweeps stay cheap in
///    memory at the cost of re-evaluating the flow field.
/// Auto picks Precomputed while the estimate fits the memory budget.
///
/// Rows are stochastic by construction: successor coordinates are clamped
/// (non-periodic) or wrapped (periodic) by the grid, so weights are
/// nonnegative and sum to 1.
class TransitionTable {
 public:
  enum class Mode { Auto, Precomputed, OnTheFly };

  TransitionTable(const GridSpec& grid, const SystemModel& model, double dt,
                  double lambda, Mode mode = Mode::Auto,
                  std::size_t memory_budget = kDefaultBudget, int threads = 0,
                  std::optional<double> gamma_override = std::nullopt)
      : grid_(grid), model_(&model), dt_(dt), lambda_(lambda), threads_(threads) {
    if (!(dt > 0.0)) throw std::invalid_argument("TransitionTable: dt must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("TransitionTable: lambda must be >= 0");
    if (grid.dim() != model.dim())
      throw std::invalid_argument("TransitionTable: grid/model dimension mismatch");
    gamma_ = gamma_override ? *gamma_override : std::exp(-lambda * dt);
    if (gamma_override) lambda_ = -std::log(*gamma_override) / dt;
    if (!(gamma_ > 0.0) || gamma_ > 1.0)
      throw std::invalid_argument("TransitionTable: gamma must be in (0, 1]");

    n_controls_ = model.controls().count();
    n_dist_ = model.disturbances().count();
    if (n_controls_ < 1)
      throw std::invalid_argument("TransitionTable: control set must be non-empty");

    // Node coordinates are cached in both modes; stencil construction and
    // on-the-fly evaluation share them.
    const int n = grid_.dim();
    coords_.resize(grid_.size() * n);
    for (std::size_t i = 0; i < grid_.size(); ++i)
      grid_.node_coords_into(i, coords_.data() + i * n);

    const std::size_t rows = grid_.size() * count_per_node();
    const std::size_t estimate = rows * std::size_t(n) * (sizeof(std::int32_t) + sizeof(double));
    if (mode == Mode::Precomputed && estimate > memory_budget)
      throw std::runtime_error("TransitionTable: memory budget exceeded (" +
                               std::to_string(estimate) + " > " +
                               std::to_string(memory_budget) + " bytes)");
    precomputed_ = (mode == Mode::Precomputed) ||
                   (mode == Mode::Auto && estimate <= memory_budget);
    if (precomputed_) {
      base_.resize(rows * n);
      frac_.resize(rows * n);
      parallel_for(grid_.size(), threads_, [&](std::size_t ib, std::size_t ie) {
        for (std::size_t i = ib; i < ie; ++i) {
          for (int a = 0; a < n_controls_; ++a) {
            const int nb = n_dist_ == 0 ? 1 : n_dist_;
            for (int b = 0; b < nb; ++b) {
              const std::size_t r = row_index(i, a, b) * n;
              compute_stencil(i, a, b, base_.data() + r, frac_.data() + r);
            }
          }
        }
      });
    }
  }

  const GridSpec& grid() const { return grid_; }
  const SystemModel& model() const { return *model_; }
  double dt() const { return dt_; }
  double lambda() const { return lambda_; }
  double gamma() const { return gamma_; }
  int n_controls() const { return n_controls_; }
  int n_disturbances() const { return n_dist_; }
  bool precomputed() const { return precomputed_; }
  int threads() const { return threads_; }
  std::size_t size() const { return grid_.size(); }

  /// Interpolated value of the successor of node i under inputs (a, b).
  double successor_value(std::size_t i, int a, int b, const double* values) const {
    const int n = grid_.dim();
    if (precomputed_) {
      const std::size_t r = row_index(i, a, b) * n;
      return grid_.lerp_gather(base_.data() + r, frac_.data() + r, values);
    }
    std::int32_t i0[kMaxDim];
    double t[kMaxDim];
    compute_stencil(i, a, b, i0, t);
    return grid_.lerp_gather(i0, t, values);
  }

  /// The successor stencil expanded into explicit interpolation weights.
  WeightRow row(std::size_t i, int a, int b) const {
    const int n = grid_.dim();
    std::int32_t i0[kMaxDim];
    double t[kMaxDim];
    if (precomputed_) {
      const std::size_t r = row_index(i, a, b) * n;
      for (int j = 0; j < n; ++j) {
        i0[j] = base_[r + j];
        t[j] = frac_[r + j];
      }
    } else {
      compute_stencil(i, a, b, i0, t);
    }
    std::vector<double> x(n);
    // Re-derive weights through the public path so row contents match
    // interp_weights for the same located cell.
    WeightRow out;
    const int corners = 1 << n;
    out.entries.reserve(corners);
    double kept = 0.0;
    bool dropped = false;
    for (int k = 0; k < corners; ++k) {
      double w = 1.0;
      std::int64_t idx = 0;
      for (int j = 0; j < n; ++j) {
        const bool hi = ((k >> (n - 1 - j)) & 1) != 0;
        w *= hi ? t[j] : (1.0 - t[j]);
        const int node = hi ? grid_.axis_upper(j, i0[j]) : i0[j];
        idx += node * grid_.stride(j);
      }
      if (w < detail::kWeightDrop) {
        dropped = true;
        continue;
      }
      out.entries.push_back({idx, w});
      kept += w;
    }
    if (dropped && !out.entries.empty())
      for (auto& e : out.entries) e.weight /= kept;
    return out;
  }

  static constexpr std::size_t kDefaultBudget = std::size_t(3) << 30;  // 3 GiB

 private:
  std::size_t count_per_node() const {
    return std::size_t(n_controls_) * std::size_t(n_dist_ == 0 ? 1 : n_dist_);
  }
  std::size_t row_index(std::size_t i, int a, int b) const {
    const int nb = n_dist_ == 0 ? 1 : n_dist_;
    return (i * n_controls_ + a) * nb + b;
  }

  template <class IndexT>
  void compute_stencil(std::size_t i, int a, int b, IndexT* i0, double* t) const {
    const int n = grid_.dim();
    const double* x = coords_.data() + i * n;
    double f[kMaxDim];
    const double* u = model_->controls().at(a);
    const double* d = n_dist_ == 0 ? nullptr : model_->disturbances().at(b);
    model_->flow(x, u, d, f);
    for (int j = 0; j < n; ++j) {
      int lo;
      double tj;
      grid_.axis_locate(j, x[j] + dt_ * f[j], lo, tj);
      i0[j] = static_cast<IndexT>(lo);
      t[j] = tj;
    }
  }

  GridSpec grid_;
  const SystemModel* model_;
  double dt_, lambda_, gamma_;
  int n_controls_ = 0, n_dist_ = 0;
  int threads_ = 0;
  bool precomputed_ = false;
  std::vector<double> coords_;
  std::vector<std::int32_t> base_;
  std::vector<double> frac_;
};

inline TransitionTable build_transition_table(const GridSpec& grid,
                                              const SystemModel& model, double dt,
                                              double lambda,
                                              TransitionTable::Mode mode = TransitionTable::Mode::Auto,
                                              std::size_t memory_budget = TransitionTable::kDefaultBudget,
                                              int threads = 0) {
  return TransitionTable(grid, model, dt, lambda, mode, memory_budget, threads);
}

namespace detail {

// max over controls of min over disturbances of the successor value,
// ties broken toward the lowest input index. Writes the argmax control
// index if requested (one-player use).
inline double maxmin_value(const TransitionTable& tbl, std::size_t i,
                           const double* values, std::int32_t* argmax = nullptr) {
  const int nu = tbl.n_controls();
  const int nb = tbl.n_disturbances() == 0 ? 1 : tbl.n_disturbances();
  double best = -std::numeric_limits<double>::infinity();
  std::int32_t best_a = 0;
  for (int a = 0; a < nu; ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (int b = 0; b < nb; ++b) {
      const double q = tbl.successor_value(i, a, b, values);
      if (q < worst) worst = q;
    }
    if (worst > best) {
      best = worst;
      best_a = static_cast<std::int32_t>(a);
    }
  }
  if (argmax) *argmax = best_a;
  return best;
}

inline void check_lengths(const TransitionTable& tbl, const ValueVector& a,
                          const char* who) {
  if (a.size() != tbl.size())
    throw std::invalid_argument(std::string(who) + ": value vector length mismatch");
}

}  // namespace detail

/// Minimum-discounted-reward backup:
///   out_i = min{ h_i, max_a min_b gamma * phi(i,a,b) . U }.
/// One-player tables omit the inner min. A Jacobi sweep: reads U, writes a
/// distinct output, so node-level parallelism cannot change the result.
inline void mdr_backup_into(const TransitionTable& tbl, const ValueVector& h,
                            const ValueVector& U, ValueVector& out) {
  detail::check_lengths(tbl, h, "mdr_backup");
  detail::check_lengths(tbl, U, "mdr_backup");
  out.v.resize(tbl.size());
  out.role = U.role;
  const double gamma = tbl.gamma();
  const double* uv = U.data();
  const double* hv = h.data();
  double* ov = out.data();
  parallel_for(tbl.size(), tbl.threads(), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const double q = gamma * detail::maxmin_value(tbl, i, uv);
      ov[i] = std::min(hv[i], q);
    }
  });
}

inline ValueVector mdr_backup(const TransitionTable& tbl, const ValueVector& h,
                              const ValueVector& U) {
  ValueVector out;
  mdr_backup_into(tbl, h, U, out);
  out.role = ValueRole::mdr_shifted;
  return out;
}

/// Minimum-reward backup: the undiscounted variant with l in place of h.
///   out_i = min{ l_i, max_a min_b phi(i,a,b) . V }
/// Not a contraction; value iteration must start from l.
inline void mr_backup_into(const TransitionTable& tbl, const ValueVector& l,
                           const ValueVector& V, ValueVector& out) {
  detail::check_lengths(tbl, l, "mr_backup");
  detail::check_lengths(tbl, V, "mr_backup");
  out.v.resize(tbl.size());
  out.role = V.role;
  const double* vv = V.data();
  const double* lv = l.data();
  double* ov = out.data();
  parallel_for(tbl.size(), tbl.threads(), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const double q = 1.0 * detail::maxmin_value(tbl, i, vv);
      ov[i] = std::min(lv[i], q);
    }
  });
}

inline ValueVector mr_backup(const TransitionTable& tbl, const ValueVector& l,
                             const ValueVector& V) {
  ValueVector out;
  mr_backup_into(tbl, l, V, out);
  out.role = ValueRole::mr_value;
  return out;
}

/// Sum-of-discounted-rewards backup (one-player only):
///   out_i = dt * r_i + gamma * max_a phi(i,a) . A
inline void sdr_backup_into(const TransitionTable& tbl, const ValueVector& r,
                            const ValueVector& A, ValueVector& out) {
  if (tbl.n_disturbances() > 0)
    throw std::invalid_argument("sdr_backup: disturbance set must be empty");
  detail::check_lengths(tbl, r, "sdr_backup");
  detail::check_lengths(tbl, A, "sdr_backup");
  out.v.resize(tbl.size());
  out.role = A.role;
  const double gamma = tbl.gamma();
  const double dt = tbl.dt();
  const double* av = A.data();
  const double* rv = r.data();
  double* ov = out.data();
  parallel_for(tbl.size(), tbl.threads(), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i)
      ov[i] = dt * rv[i] + gamma * detail::maxmin_value(tbl, i, av);
  });
}

inline ValueVector sdr_backup(const TransitionTable& tbl, const ValueVector& r,
                              const ValueVector& A) {
  ValueVector out;
  sdr_backup_into(tbl, r, A, out);
  out.role = ValueRole::sdr_value;
  return out;
}

/// Fixed-policy backup (one-player only): no optimization over actions.
///   out_i = min{ h_i, gamma * phi(i, pi(i)) . U }
inline void policy_backup_into(const TransitionTable& tbl, const ValueVector& h,
                               const PolicyPair& policy, const ValueVector& U,
                               ValueVector& out) {
  if (tbl.n_disturbances() > 0)
    throw std::invalid_argument("policy_backup: disturbance set must be empty");
  detail::check_lengths(tbl, h, "policy_backup");
  detail::check_lengths(tbl, U, "policy_backup");
  if (policy.control.size() != tbl.size())
    throw std::invalid_argument("policy_backup: policy length mismatch");
  for (std::int32_t a : policy.control)
    if (a < 0 || a >= tbl.n_controls())
      throw std::out_of_range("policy_backup: policy index out of range");
  out.v.resize(tbl.size());
  out.role = U.role;
  const double gamma = tbl.gamma();
  const double* uv = U.data();
  const double* hv = h.data();
  double* ov = out.data();
  parallel_for(tbl.size(), tbl.threads(), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const std::int32_t a = policy.control[i];
      ov[i] = std::min(hv[i], gamma * tbl.successor_value(i, a, 0, uv));
    }
  });
}

inline ValueVector policy_backup(const TransitionTable& tbl, const ValueVector& h,
                                 const PolicyPair& policy, const ValueVector& U) {
  ValueVector out;
  policy_backup_into(tbl, h, policy, U, out);
  out.role = ValueRole::mdr_shifted;
  return out;
}

/// Per node, the lowest-index control maximizing the backed-up value of U
/// (one-player only). policy_backup(greedy_policy(U), U) reproduces
/// mdr_backup(U) exactly.
inline PolicyPair greedy_policy(const TransitionTable& tbl, const ValueVector&,
                                const ValueVector& U) {
  if (tbl.n_disturbances() > 0)
    throw std::invalid_argument("greedy_policy: disturbance set must be empty");
  detail::check_lengths(tbl, U, "greedy_policy");
  PolicyPair out;
  out.control.resize(tbl.size());
  const double* uv = U.data();
  parallel_for(tbl.size(), tbl.threads(), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i)
      detail::maxmin_value(tbl, i, uv, &out.control[i]);
  });
  return out;
}

}  // namespace mdr
