#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdr/backup.hpp"
#include "mdr/config.hpp"
#include "mdr/grid.hpp"
#include "mdr/io.hpp"
#include "mdr/models.hpp"
#include "mdr/reach.hpp"
#include "mdr/solver.hpp"
#include "mdr/targets.hpp"
#include "mdr/tdlearn.hpp"
#include "mdr/value.hpp"

namespace mdr {

/// Exit codes shared by the CLI subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNotConverged = 2;

struct SolveOutcome {
  GridSpec grid;
  ValueVector solution;     // U for mdr, V for mr, raw value for sdr
  SolveReport report;
  double L = 0.0;
  double dt = 0.0;
  double gamma = 1.0;
  double lambda = 0.0;
  std::string kind;
};

namespace detail {

inline ValueVector resolve_init(const RunConfig& cfg, const DiscreteProblem& p,
                                std::string& provenance) {
  if (cfg.init == "default") {
    provenance = cfg.kind == "mr" ? "default-l" : (cfg.kind == "sdr" ? "zeros" : "default-h");
    if (cfg.kind == "mr") return p.l;
    if (cfg.kind == "sdr") return ValueVector(p.grid.size(), 0.0, ValueRole::sdr_value);
    return p.h;
  }
  if (cfg.init == "zeros") {
    provenance = "zeros";
    return ValueVector(p.grid.size(), 0.0);
  }
  const std::string path = cfg.init.substr(5);  // validated "file:<path>"
  ValueDump dump = read_values(path);
  if (!(dump.grid == p.grid))
    throw ConfigError("init values were dumped on a different grid: " + path);
  provenance = "file:" + path;
  return std::move(dump.values);
}

inline double resolve_contour_level(const std::string& token, const RunConfig& cfg,
                                    double L) {
  if (token == "under") return 0.0;
  if (token == "over") {
    if (cfg.kind == "mdr") {
      ApproximationParams p{cfg.lambda, cfg.tau_bar, L};
      return over_approx_threshold(p);
    }
    return 0.0;  // no discount error without discounting
  }
  return to_double(token, "output.contour_levels");
}

inline std::string level_tag(const std::string& token) {
  std::string t = token;
  for (char& c : t)
    if (c == '.' || c == '-' || c == '+') c = '_';
  return t;
}

}  // namespace detail

/// Run the configured solve and return the in-memory results; file export is
/// a separate step so tests and the compare tool can reuse this.
inline SolveOutcome execute_solve(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  GridSpec grid = cfg.make_grid();
  TargetSpec target = cfg.make_target();
  std::unique_ptr<SystemModel> model = cfg.make_model();

  if (cfg.kind != "mdr" && cfg.method != "vi")
    throw ConfigError("method " + cfg.method + " requires kind mdr");

  const double lambda = cfg.kind == "mr" ? 0.0 : cfg.lambda;
  DiscreteProblem problem(grid, *model, target, lambda, cfg.dt,
                          TransitionTable::Mode::Auto, TransitionTable::kDefaultBudget,
                          cfg.threads);
  if (cfg.kind == "mdr" && !(problem.gamma() < 1.0))
    log << "warning: gamma == 1 (lambda*dt underflows); the backup is not a "
           "contraction\n";

  SolverConfig scfg;
  scfg.epsilon = cfg.epsilon;
  scfg.max_iterations = cfg.max_iterations
                            ? *cfg.max_iterations
                            : default_max_iterations(cfg.epsilon, problem.L, problem.gamma());

  SolveOutcome out{problem.grid, {}, {}, problem.L, problem.dt, problem.gamma(),
                   lambda, cfg.kind};

  if (cfg.method == "vi") {
    std::string provenance;
    ValueVector init = detail::resolve_init(cfg, problem, provenance);
    if (cfg.kind == "mr") {
      MrBackupOp op(problem.table, problem.l);
      auto [v, report] = value_iteration(op, init, scfg, provenance);
      out.solution = std::move(v);
      out.solution.role = ValueRole::mr_value;
      out.report = std::move(report);
    } else if (cfg.kind == "sdr") {
      // The CLI exposes the sum-of-discounted-rewards baseline with the
      // surface function as the running reward.
      SdrBackupOp op(problem.table, problem.l);
      auto [v, report] = value_iteration(op, init, scfg, provenance);
      out.solution = std::move(v);
      out.solution.role = ValueRole::sdr_value;
      out.report = std::move(report);
    } else {
      MdrBackupOp op(problem.table, problem.h);
      auto [v, report] = value_iteration(op, init, scfg, provenance);
      out.solution = std::move(v);
      out.solution.role = ValueRole::mdr_shifted;
      out.report = std::move(report);
    }
  } else if (cfg.method == "pi") {
    auto [v, report] = policy_iteration(problem.table, problem.h, scfg);
    out.solution = std::move(v);
    out.solution.role = ValueRole::mdr_shifted;
    out.report = std::move(report);
  } else if (cfg.method == "multigrid") {
    std::vector<GridSpec> chain = {problem.grid};
    for (int k = 1; k < cfg.multigrid_levels; ++k)
      chain.insert(chain.begin(), coarsen(chain.front()));
    MultigridResult mg = multigrid_solve(chain, *model, target, lambda, scfg, cfg.dt,
                                         TransitionTable::Mode::Auto,
                                         TransitionTable::kDefaultBudget, cfg.threads);
    for (std::size_t lev = 0; lev < mg.levels.size(); ++lev)
      log << "multigrid level " << lev << ": iterations=" << mg.levels[lev].iterations
          << " converged=" << (mg.levels[lev].converged ? "true" : "false") << "\n";
    out.solution = std::move(mg.values);
    out.solution.role = ValueRole::mdr_shifted;
    out.report = mg.levels.back();
  } else {  // warmstart
    ValueDump dump = read_values(cfg.warmstart_values);
    if (!(dump.grid == problem.grid))
      throw ConfigError("warmstart values were dumped on a different grid: " +
                        cfg.warmstart_values);
    auto [v, report] = warm_start_solve(dump.values, problem, scfg);
    out.solution = std::move(v);
    out.solution.role = ValueRole::mdr_shifted;
    out.report = std::move(report);
  }
  return out;
}

/// The vector on set scale: Z = U + L for mdr, V for mr, raw otherwise.
inline ValueVector set_scale_values(const SolveOutcome& o) {
  if (o.kind == "mdr") return z_from_u(o.solution, o.L);
  return o.solution;
}

inline void export_artifacts(const RunConfig& cfg, const SolveOutcome& o,
                             std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::exists(dir))
    throw ConfigError("cannot create output directory: " + dir.string());

  if (cfg.export_values) {
    write_values(dir / "values.bin", o.grid, o.solution);
    log << "wrote " << (dir / "values.bin").string() << "\n";
  }
  if (cfg.export_report) {
    ReportMeta meta{cfg.kind, cfg.method, o.lambda, o.gamma, o.dt, o.L, cfg.epsilon};
    write_text(dir / "report.txt", format_report(meta, o.grid, o.report));
    log << "wrote " << (dir / "report.txt").string() << "\n";
  }
  if (!cfg.export_contours && !cfg.export_svg) return;

  const ValueVector scale = set_scale_values(o);
  // The target outline accompanies every plot.
  GridSpec grid = o.grid;

  struct LevelEntry {
    std::string tag;
    double level;
  };
  std::vector<LevelEntry> levels;
  for (const auto& tok : cfg.contour_levels)
    levels.push_back({detail::level_tag(tok), detail::resolve_contour_level(tok, cfg, o.L)});

  auto style_for = [](const std::string& tag) -> SvgStyle {
    if (tag == "under") return {"#2ca02c", 2.5, "", "under-approximation"};
    if (tag == "over") return {"#1f77b4", 2.5, "6,4", "over-approximation"};
    return {"#7f7f7f", 1.5, "2,3", "level"};
  };

  if (grid.dim() == 2) {
    ValueVector l_vals = l_vector(cfg.make_target(), grid);
    std::vector<SvgLayer> layers;
    layers.push_back({extract_contour(grid, l_vals, 0.0),
                      {"#d62728", 2.0, "", "target-boundary"}});
    for (const auto& le : levels) {
      auto polys = extract_contour(grid, scale, le.level);
      if (cfg.export_contours) {
        const fs::path p = dir / ("contour_" + le.tag + ".csv");
        write_contours_csv(p, polys);
        log << "wrote " << p.string() << "\n";
      }
      layers.push_back({std::move(polys), style_for(le.tag)});
    }
    if (cfg.export_svg) {
      const fs::path p = dir / "contours.svg";
      write_svg(p, grid.lower(0), grid.upper(0), grid.lower(1), grid.upper(1), layers);
      log << "wrote " << p.string() << "\n";
    }
  } else if (grid.dim() == 3) {
    const int axis = cfg.slice_axis >= 0 ? cfg.slice_axis : 2;
    std::vector<int> slice_indices;
    if (cfg.slice_coords.empty()) {
      slice_indices.push_back(0);
    } else {
      for (double c : cfg.slice_coords) {
        int i0;
        double t;
        grid.axis_locate(axis, c, i0, t);
        slice_indices.push_back(t <= 0.5 ? i0 : grid.axis_upper(axis, i0));
      }
    }
    ValueVector l_vals = l_vector(cfg.make_target(), grid);
    int plane[2], k = 0;
    for (int j = 0; j < 3; ++j)
      if (j != axis) plane[k++] = j;
    for (std::size_t s = 0; s < slice_indices.size(); ++s) {
      std::vector<SvgLayer> layers;
      layers.push_back({extract_contour_slice(grid, l_vals, axis, slice_indices[s], 0.0),
                        {"#d62728", 2.0, "", "target-boundary"}});
      for (const auto& le : levels) {
        auto polys = extract_contour_slice(grid, scale, axis, slice_indices[s], le.level);
        if (cfg.export_contours) {
          const fs::path p =
              dir / ("contour_" + le.tag + "_slice" + std::to_string(s) + ".csv");
          write_contours_csv(p, polys);
          log << "wrote " << p.string() << "\n";
        }
        layers.push_back({std::move(polys), style_for(le.tag)});
      }
      if (cfg.export_svg) {
        const fs::path p = dir / ("contours_slice" + std::to_string(s) + ".svg");
        write_svg(p, grid.lower(plane[0]), grid.upper(plane[0]), grid.lower(plane[1]),
                  grid.upper(plane[1]), layers);
        log << "wrote " << p.string() << "\n";
      }
    }
  }
}

inline int run_solve(const RunConfig& cfg, std::ostream& log) {
  SolveOutcome o = execute_solve(cfg, log);
  export_artifacts(cfg, o, log);
  log << "iterations = " << o.report.iterations
      << ", converged = " << (o.report.converged ? "true" : "false")
      << ", final residual = " << o.report.last_residual() << "\n";
  return o.report.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// compare: run two configurations on the same grid and report the gaps.
// ---------------------------------------------------------------------------

struct CompareOutcome {
  double inf_gap = 0.0;
  double one_gap = 0.0;
  std::int64_t ordering_violations = 0;  // count of A_i < B_i - 2*eps
  std::int64_t iterations_a = 0, iterations_b = 0;
  bool converged_a = false, converged_b = false;
};

inline CompareOutcome compare_outcomes(const SolveOutcome& a, const SolveOutcome& b,
                                       double epsilon) {
  if (!(a.grid == b.grid))
    throw ConfigError("compare: the two solves use different grids");
  const ValueVector za = set_scale_values(a);
  const ValueVector zb = set_scale_values(b);
  CompareOutcome out;
  out.inf_gap = inf_norm_diff(za.v, zb.v);
  out.one_gap = one_norm_diff(za.v, zb.v);
  for (std::size_t i = 0; i < za.size(); ++i)
    if (za[i] < zb[i] - 2.0 * epsilon) ++out.ordering_violations;
  out.iterations_a = a.report.iterations;
  out.iterations_b = b.report.iterations;
  out.converged_a = a.report.converged;
  out.converged_b = b.report.converged;
  return out;
}

inline std::string format_compare(const CompareOutcome& c) {
  std::ostringstream os;
  os << "mdr-compare\n";
  os << "inf_gap = " << format_double(c.inf_gap) << '\n';
  os << "one_gap = " << format_double(c.one_gap) << '\n';
  os << "ordering_violations = " << c.ordering_violations << '\n';
  os << "iterations_a = " << c.iterations_a << '\n';
  os << "iterations_b = " << c.iterations_b << '\n';
  os << "converged_a = " << (c.converged_a ? "true" : "false") << '\n';
  os << "converged_b = " << (c.converged_b ? "true" : "false") << '\n';
  return os.str();
}

inline int run_compare(const RunConfig& cfg_a, const RunConfig& cfg_b,
                       const std::string& output_dir, std::ostream& log) {
  SolveOutcome a = execute_solve(cfg_a, log);
  SolveOutcome b = execute_solve(cfg_b, log);
  const CompareOutcome c = compare_outcomes(a, b, std::max(cfg_a.epsilon, cfg_b.epsilon));
  const std::string text = format_compare(c);
  log << text;
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    write_text(std::filesystem::path(output_dir) / "compare.txt", text);
  }
  return (c.converged_a && c.converged_b) ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// tdlearn: train the grid interpolant from transitions and export curves.
// ---------------------------------------------------------------------------

inline std::vector<Transition> read_transitions_csv(const std::filesystem::path& path,
                                                    int dim) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open dataset: " + path.string());
  std::vector<Transition> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cols.push_back(detail::to_double(cell, path.string() + ":" + std::to_string(lineno)));
    if (static_cast<int>(cols.size()) != 2 * dim + 1)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(2 * dim + 1) + " columns");
    Transition tr;
    tr.x.assign(cols.begin(), cols.begin() + dim);
    tr.x_next.assign(cols.begin() + dim, cols.begin() + 2 * dim);
    tr.dt = cols.back();
    if (!(tr.dt > 0.0))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": dt must be > 0");
    out.push_back(std::move(tr));
  }
  return out;
}

inline void write_transitions_csv(const std::filesystem::path& path,
                                  const std::vector<Transition>& transitions) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_transitions_csv: cannot open " + path.string());
  for (const auto& tr : transitions) {
    bool first = true;
    for (double v : tr.x) {
      if (!first) os << ',';
      os << format_double(v);
      first = false;
    }
    for (double v : tr.x_next) os << ',' << format_double(v);
    os << ',' << format_double(tr.dt) << '\n';
  }
}

inline int run_tdlearn(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (cfg.kind != "mdr") throw ConfigError("tdlearn requires kind mdr");
  GridSpec grid = cfg.make_grid();
  TargetSpec target = cfg.make_target();
  std::unique_ptr<SystemModel> model = cfg.make_model();
  if (model->two_player()) throw ConfigError("tdlearn requires a one-player model");

  std::vector<Transition> samples;
  if (!cfg.td_dataset.empty()) {
    samples = read_transitions_csv(cfg.td_dataset, grid.dim());
  } else {
    if (cfg.td_rollout_x0.empty() || cfg.td_rollout_steps <= 0)
      throw ConfigError("tdlearn needs either a dataset or rollout_x0 + rollout_steps");
    if (static_cast<int>(cfg.td_rollout_x0.size()) != grid.dim())
      throw ConfigError("tdlearn rollout_x0 dimension mismatch");
    const double dt = cfg.td_dt ? *cfg.td_dt : (cfg.dt ? *cfg.dt : cfl_dt(grid, *model));
    const double u = cfg.td_rollout_control;
    samples = rollout(*model, [u](const std::vector<double>&) { return u; },
                      cfg.td_rollout_x0, dt, cfg.td_rollout_steps, grid);
  }
  if (samples.empty()) throw ConfigError("tdlearn: empty sample stream");
  const double dt = samples.front().dt;
  for (const auto& tr : samples)
    if (tr.dt != dt) throw ConfigError("tdlearn: dt must be constant across the dataset");

  const double L = clip_bound(target, grid);
  ValueVector h = h_vector(target, grid);

  TDConfig td;
  td.gamma = std::exp(-cfg.lambda * dt);
  td.passes = cfg.td_passes;
  td.shuffle = cfg.td_shuffle;
  td.seed = cfg.seed;
  if (cfg.td_alpha == "decay") {
    td.schedule = TDConfig::Alpha::visit_decay;
  } else {
    td.schedule = TDConfig::Alpha::constant;
    td.alpha = detail::to_double(cfg.td_alpha, "tdlearn.alpha");
  }

  std::vector<double> theta0;
  if (cfg.td_theta0 == "zeros")
    theta0.assign(grid.size(), 0.0);
  else
    theta0 = h.v;

  std::optional<ValueVector> reference;
  if (cfg.td_reference == "solve") {
    RunConfig ref_cfg = cfg;
    ref_cfg.method = "vi";
    ref_cfg.init = "default";
    ref_cfg.dt = dt;  // the reference shares the sample time step
    SolveOutcome ref = execute_solve(ref_cfg, log);
    reference = std::move(ref.solution);
  } else if (cfg.td_reference != "none") {
    throw ConfigError("tdlearn.reference must be none|solve");
  }

  auto h_fn = [&](const std::vector<double>& x) { return interpolate(grid, h, x); };
  TDResult result = td_train(grid, samples, h_fn, td, std::move(theta0),
                             reference ? &reference->v : nullptr);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_values(dir / "theta.bin", grid,
               ValueVector(result.theta, ValueRole::mdr_shifted));
  write_learning_curve_csv(dir / "learning_curve.csv", result.curve);
  log << "wrote " << (dir / "theta.bin").string() << "\n";
  log << "wrote " << (dir / "learning_curve.csv").string() << "\n";
  if (reference) {
    const double gap = inf_norm_diff(result.theta, reference->v);
    log << "final gap to solver fixed point = " << format_double(gap) << "\n";
  }
  return kExitOk;
}

}  // namespace mdr
