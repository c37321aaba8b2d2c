#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdr/backup.hpp"
#include "mdr/grid.hpp"
#include "mdr/models.hpp"
#include "mdr/targets.hpp"
#include "mdr/value.hpp"

namespace mdr {

struct SolverConfig {
  double epsilon = 1e-3;              // infinity-norm gap between consecutive iterates
  std::int64_t max_iterations = 100000;
};

/// Contraction-derived worst case with a safety factor of 10. For gamma == 1
/// there is no such bound; fall back to a large fixed cap.
inline std::int64_t default_max_iterations(double epsilon, double L, double gamma) {
  if (!(gamma < 1.0)) return 100000;
  if (!(L > 0.0) || !(epsilon > 0.0) || epsilon >= 2.0 * L) return 100000;
  const double k = std::log(epsilon / (2.0 * L)) / std::log(gamma);
  const double capped = std::min(std::ceil(k) * 10.0, 9.0e18);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(capped));
}

struct SolveReport {
  std::int64_t iterations = 0;
  std::vector<double> residuals;  // ||U^{k+1} - U^k||_inf per iteration
  bool converged = false;
  double wall_time_s = 0.0;
  std::string init_provenance = "default";

  double last_residual() const {
    return residuals.empty() ? std::numeric_limits<double>::infinity()
                             : residuals.back();
  }
};

/// Repeated backup application until consecutive iterates differ by at most
/// cfg.epsilon in the infinity norm. Backups that require a specific
/// initialization (the non-contractive minimum-reward backup) reject any
/// other init.
///
/// The Backup type provides:
///   void apply(const ValueVector& in, ValueVector& out) const
///   double gamma() const
///   const ValueVector* required_init() const   (nullptr if arbitrary)
template <class Backup>
std::pair<ValueVector, SolveReport> value_iteration(const Backup& op,
                                                    const ValueVector& init,
                                                    const SolverConfig& cfg,
                                                    std::string init_provenance = "supplied") {
  if (!(cfg.epsilon > 0.0))
    throw std::invalid_argument("value_iteration: epsilon must be > 0");
  if (cfg.max_iterations < 1)
    throw std::invalid_argument("value_iteration: max_iterations must be >= 1");
  if (const ValueVector* req = op.required_init()) {
    if (req->size() != init.size() || req->v != init.v)
      throw std::invalid_argument(
          "value_iteration: this backup is not a contraction and must be "
          "initialized with its default vector");
  }

  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  report.init_provenance = std::move(init_provenance);
  report.residuals.reserve(64);

  ValueVector u = init;
  ValueVector next;
  for (std::int64_t k = 0; k < cfg.max_iterations; ++k) {
    op.apply(u, next);
    const double res = inf_norm_diff(u.v, next.v);
    report.residuals.push_back(res);
    std::swap(u.v, next.v);
    u.role = next.role;
    ++report.iterations;
    if (res <= cfg.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(u), std::move(report)};
}

class MdrBackupOp {
 public:
  MdrBackupOp(const TransitionTable& tbl, const ValueVector& h) : tbl_(&tbl), h_(&h) {
    detail::check_lengths(tbl, h, "MdrBackupOp");
  }
  void apply(const ValueVector& in, ValueVector& out) const {
    mdr_backup_into(*tbl_, *h_, in, out);
  }
  double gamma() const { return tbl_->gamma(); }
  const ValueVector* required_init() const { return nullptr; }
  const ValueVector& default_init() const { return *h_; }
  const TransitionTable& table() const { return *tbl_; }

 private:
  const TransitionTable* tbl_;
  const ValueVector* h_;
};

class MrBackupOp {
 public:
  MrBackupOp(const TransitionTable& tbl, const ValueVector& l) : tbl_(&tbl), l_(&l) {
    detail::check_lengths(tbl, l, "MrBackupOp");
  }
  void apply(const ValueVector& in, ValueVector& out) const {
    mr_backup_into(*tbl_, *l_, in, out);
  }
  double gamma() const { return 1.0; }
  // Not a contraction: value iteration is sound only from l.
  const ValueVector* required_init() const { return l_; }
  const ValueVector& default_init() const { return *l_; }

 private:
  const TransitionTable* tbl_;
  const ValueVector* l_;
};

class SdrBackupOp {
 public:
  SdrBackupOp(const TransitionTable& tbl, const ValueVector& r) : tbl_(&tbl), r_(&r) {}
  void apply(const ValueVector& in, ValueVector& out) const {
    sdr_backup_into(*tbl_, *r_, in, out);
  }
  double gamma() const { return tbl_->gamma(); }
  const ValueVector* required_init() const { return nullptr; }

 private:
  const TransitionTable* tbl_;
  const ValueVector* r_;
};

class PolicyBackupOp {
 public:
  PolicyBackupOp(const TransitionTable& tbl, const ValueVector& h, const PolicyPair& pi)
      : tbl_(&tbl), h_(&h), pi_(&pi) {}
  void apply(const ValueVector& in, ValueVector& out) const {
    policy_backup_into(*tbl_, *h_, *pi_, in, out);
  }
  double gamma() const { return tbl_->gamma(); }
  const ValueVector* required_init() const { return nullptr; }

 private:
  const TransitionTable* tbl_;
  const ValueVector* h_;
  const PolicyPair* pi_;
};

/// Policy iteration for the one-player discounted problem: alternate policy
/// evaluation (value iteration under the fixed-policy backup, to epsilon/10)
/// with greedy improvement; stop when the policy repeats or the evaluated
/// value moves by at most epsilon.
///
/// on_policy_value, when set, receives each evaluated policy value U^{pi_k};
/// the sequence is nondecreasing up to the inner tolerance.
inline std::pair<ValueVector, SolveReport> policy_iteration(
    const TransitionTable& tbl, const ValueVector& h, const SolverConfig& cfg,
    const std::function<void(const ValueVector&)>& on_policy_value = nullptr) {
  if (tbl.n_disturbances() > 0)
    throw std::invalid_argument("policy_iteration: two-player tables are not supported");
  if (!(tbl.gamma() < 1.0))
    throw std::invalid_argument("policy_iteration: requires a discounted problem (gamma < 1)");
  const auto t0 = std::chrono::steady_clock::now();

  SolverConfig inner = cfg;
  inner.epsilon = cfg.epsilon / 10.0;

  SolveReport report;
  report.init_provenance = "default";

  ValueVector u = h;
  u.role = ValueRole::mdr_shifted;
  PolicyPair pi = greedy_policy(tbl, h, u);
  bool value_converged = false;
  for (std::int64_t k = 0; k < cfg.max_iterations; ++k) {
    PolicyBackupOp op(tbl, h, pi);
    auto [u_pi, eval_report] = value_iteration(op, u, inner, "policy-evaluation");
    if (on_policy_value) on_policy_value(u_pi);
    const double moved = inf_norm_diff(u_pi.v, u.v);
    report.residuals.push_back(moved);
    ++report.iterations;
    value_converged = eval_report.converged;
    PolicyPair next = greedy_policy(tbl, h, u_pi);
    const bool policy_stable = next.control == pi.control;
    u = std::move(u_pi);
    if (policy_stable || moved <= cfg.epsilon) {
      report.converged = value_converged;
      break;
    }
    pi = std::move(next);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(u), std::move(report)};
}

/// The contraction residual bound of Proposition-style warm-start selection:
/// for each candidate A, ||A* - A|| <= (1/(1-gamma)) ||B[A] - A||. Returns
/// the index minimizing the bound (equivalently the residual), spending
/// exactly one backup application per candidate.
struct SelectInitResult {
  std::size_t chosen = 0;
  std::vector<double> residuals;
  std::vector<double> bounds;
};

template <class Backup>
SelectInitResult select_init(const std::vector<const ValueVector*>& candidates,
                             const Backup& op) {
  if (candidates.empty())
    throw std::invalid_argument("select_init: candidate list is empty");
  if (!(op.gamma() < 1.0))
    throw std::invalid_argument("select_init: requires a contraction (gamma < 1)");
  SelectInitResult out;
  const double factor = 1.0 / (1.0 - op.gamma());
  ValueVector mapped;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    op.apply(*candidates[c], mapped);
    const double res = inf_norm_diff(mapped.v, candidates[c]->v);
    out.residuals.push_back(res);
    out.bounds.push_back(factor * res);
    if (res < best) {
      best = res;
      out.chosen = c;
    }
  }
  return out;
}

/// One discretized problem instance: grid, target values, transition table.
struct ProblemKindTag {
  enum Kind { mdr, mr, sdr };
};
using ProblemKind = ProblemKindTag::Kind;

struct DiscreteProblem {
  GridSpec grid;
  double L = 0.0;
  ValueVector l;
  ValueVector h;
  double dt = 0.0;
  double lambda = 0.0;
  TransitionTable table;

  DiscreteProblem(const GridSpec& g, const SystemModel& model, const TargetSpec& target,
                  double lambda_, std::optional<double> dt_override = std::nullopt,
                  TransitionTable::Mode mode = TransitionTable::Mode::Auto,
                  std::size_t memory_budget = TransitionTable::kDefaultBudget,
                  int threads = 0, std::optional<double> gamma_override = std::nullopt)
      : grid(g),
        L(clip_bound(target, g)),
        l(l_vector(target, g)),
        h(h_vector(target, g)),
        dt(dt_override ? *dt_override : cfl_dt(g, model)),
        lambda(lambda_),
        table(g, model, dt, lambda_, mode, memory_budget, threads, gamma_override) {}

  double gamma() const { return table.gamma(); }
};

/// Coarse-to-fine cascade: solve the first grid from the default init, then
/// initialize each finer level with the prolonged previous solution.
struct MultigridResult {
  ValueVector values;
  std::vector<SolveReport> levels;
};

inline MultigridResult multigrid_solve(
    const std::vector<GridSpec>& grids, const SystemModel& model,
    const TargetSpec& target, double lambda, const SolverConfig& cfg,
    std::optional<double> dt_override = std::nullopt,
    TransitionTable::Mode mode = TransitionTable::Mode::Auto,
    std::size_t memory_budget = TransitionTable::kDefaultBudget, int threads = 0) {
  if (grids.empty()) throw std::invalid_argument("multigrid_solve: no grids");
  for (std::size_t k = 1; k < grids.size(); ++k) {
    if (!grids[k].same_domain(grids[k - 1]))
      throw std::invalid_argument("multigrid_solve: level domains differ");
    for (int j = 0; j < grids[k].dim(); ++j)
      if (grids[k].nodes(j) < grids[k - 1].nodes(j))
        throw std::invalid_argument("multigrid_solve: levels must be ordered coarse to fine");
  }

  MultigridResult out;
  ValueVector init;
  std::string provenance = "default-h";
  for (std::size_t level = 0; level < grids.size(); ++level) {
    DiscreteProblem p(grids[level], model, target, lambda, dt_override, mode,
                      memory_budget, threads);
    if (level == 0) {
      init = p.h;
    } else {
      init = prolong(init, grids[level - 1], grids[level]);
      provenance = "prolonged-coarse";
    }
    MdrBackupOp op(p.table, p.h);
    auto [u, report] = value_iteration(op, init, cfg, provenance);
    out.levels.push_back(std::move(report));
    init = std::move(u);
  }
  out.values = std::move(init);
  return out;
}

/// Warm start: rank {default h, old solution} by the contraction residual
/// bound and run value iteration from the winner.
inline std::pair<ValueVector, SolveReport> warm_start_solve(
    const ValueVector& old_solution, const DiscreteProblem& problem,
    const SolverConfig& cfg) {
  if (old_solution.size() != problem.grid.size())
    throw std::invalid_argument("warm_start_solve: old solution is on a different grid");
  MdrBackupOp op(problem.table, problem.h);
  const SelectInitResult sel = select_init({&problem.h, &old_solution}, op);
  const bool warm = sel.chosen == 1;
  auto result = value_iteration(op, warm ? old_solution : problem.h, cfg,
                                warm ? "warm-start" : "default-h");
  return result;
}

}  // namespace mdr
