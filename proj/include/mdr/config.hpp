#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/models.hpp"
#include "mdr/targets.hpp"

namespace mdr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed experiment description. Grid/target/model sections mirror the
/// library types; problem and output sections drive the solve.
struct RunConfig {
  // [problem]
  std::string kind = "mdr";            // mr | mdr | sdr
  double lambda = 0.0;
  std::optional<double> dt;            // empty = auto (CFL rule)
  double epsilon = 1e-3;
  std::optional<std::int64_t> max_iterations;  // empty = contraction default
  std::string method = "vi";           // vi | pi | multigrid | warmstart
  int multigrid_levels = 2;
  std::string warmstart_values;        // dump path for method = warmstart
  std::string init = "default";        // default | zeros | file:<path>
  double tau_bar = 2.0;

  // [model]
  std::string model_name;              // double_integrator | pursuit_evasion | chain1d
  double u_max = 2.0;
  double d_max = 0.0;
  double v_u = 5.0;
  double v_d = 5.0;
  double speed = 1.0;                  // chain1d
  int n_controls = 2;
  int n_disturbances = 0;

  // [grid]
  std::vector<double> grid_lower, grid_upper;
  std::vector<int> grid_nodes;
  std::vector<std::uint8_t> grid_periodic;

  // [target]
  std::string target_shape = "box_complement";
  std::vector<double> target_lower, target_upper;
  double target_radius = 0.0;
  int target_axis1 = 0, target_axis2 = 1;
  std::optional<double> clip_bound;    // empty = auto

  // [output]
  std::string output_dir = "out";
  bool export_values = true;
  bool export_report = true;
  bool export_contours = false;
  bool export_svg = false;
  std::vector<std::string> contour_levels = {"under", "over"};  // tokens or numbers
  int slice_axis = -1;
  std::vector<double> slice_coords;

  // [tdlearn]
  std::string td_dataset;              // CSV path, or empty when rolling out
  std::vector<double> td_rollout_x0;
  int td_rollout_steps = 0;
  double td_rollout_control = 0.0;
  std::optional<double> td_dt;
  std::string td_alpha = "decay";      // decay | <constant in [0,1]>
  int td_passes = 1;
  bool td_shuffle = false;
  std::string td_reference = "none";   // none | solve
  std::string td_theta0 = "default";   // default | zeros

  // runtime knobs (flags)
  int threads = 0;
  std::uint64_t seed = 0;

  GridSpec make_grid() const {
    return GridSpec(grid_lower, grid_upper, grid_nodes, grid_periodic);
  }

  TargetSpec make_target() const {
    if (target_shape == "box_complement")
      return TargetSpec::make_box_complement(target_lower, target_upper, clip_bound);
    if (target_shape == "cylinder")
      return TargetSpec::make_cylinder(target_radius, target_axis1, target_axis2,
                                       clip_bound);
    throw ConfigError("unknown target shape: " + target_shape);
  }

  std::unique_ptr<SystemModel> make_model() const {
    if (model_name == "double_integrator")
      return std::make_unique<DoubleIntegrator>(u_max, n_controls);
    if (model_name == "pursuit_evasion")
      return std::make_unique<PursuitEvasion>(v_u, v_d, u_max, d_max, n_controls,
                                              n_disturbances);
    if (model_name == "chain1d") return std::make_unique<Chain1D>(speed);
    throw ConfigError("unknown model: " + model_name);
  }
};

namespace detail {

struct RawConfig {
  // section -> key -> tokens
  std::map<std::string, std::map<std::string, std::vector<std::string>>> data;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = data.find(sec);
    return s != data.end() && s->second.count(key) > 0;
  }
  const std::vector<std::string>& tokens(const std::string& sec,
                                         const std::string& key) const {
    return data.at(sec).at(key);
  }
};

inline RawConfig parse_raw(std::istream& is, const std::string& origin) {
  RawConfig raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first.front() == '[') {
      if (first.back() != ']' || first.size() < 3)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
      section = first.substr(1, first.size() - 2);
      continue;
    }
    std::string eq;
    if (!(ls >> eq) || eq != "=")
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value...'");
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": missing value for '" +
                        first + "'");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside of any [section]");
    raw.data[section][first] = std::move(tokens);
  }
  return raw;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + what + ": '" + s + "'");
  }
}

inline int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + what + ": '" + s + "'");
  }
}

inline bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad boolean for " + what + ": '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config_text(std::istream& is, const std::string& origin) {
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int;
  const detail::RawConfig raw = detail::parse_raw(is, origin);
  RunConfig cfg;

  auto str1 = [&](const char* sec, const char* key, std::string& dst) {
    if (raw.has(sec, key)) dst = raw.tokens(sec, key).at(0);
  };
  auto dbl1 = [&](const char* sec, const char* key, double& dst) {
    if (raw.has(sec, key))
      dst = to_double(raw.tokens(sec, key).at(0), std::string(sec) + "." + key);
  };
  auto int1 = [&](const char* sec, const char* key, int& dst) {
    if (raw.has(sec, key))
      dst = to_int(raw.tokens(sec, key).at(0), std::string(sec) + "." + key);
  };
  auto bool1 = [&](const char* sec, const char* key, bool& dst) {
    if (raw.has(sec, key))
      dst = to_bool(raw.tokens(sec, key).at(0), std::string(sec) + "." + key);
  };
  auto dbl_list = [&](const char* sec, const char* key, std::vector<double>& dst) {
    if (!raw.has(sec, key)) return;
    dst.clear();
    for (const auto& t : raw.tokens(sec, key))
      dst.push_back(to_double(t, std::string(sec) + "." + key));
  };

  str1("problem", "kind", cfg.kind);
  dbl1("problem", "lambda", cfg.lambda);
  if (raw.has("problem", "dt")) {
    const std::string& t = raw.tokens("problem", "dt").at(0);
    if (t != "auto") cfg.dt = to_double(t, "problem.dt");
  }
  dbl1("problem", "epsilon", cfg.epsilon);
  if (raw.has("problem", "max_iterations")) {
    const std::string& t = raw.tokens("problem", "max_iterations").at(0);
    if (t != "auto") cfg.max_iterations = to_int(t, "problem.max_iterations");
  }
  str1("problem", "method", cfg.method);
  int1("problem", "multigrid_levels", cfg.multigrid_levels);
  str1("problem", "warmstart_values", cfg.warmstart_values);
  str1("problem", "init", cfg.init);
  dbl1("problem", "tau_bar", cfg.tau_bar);

  str1("model", "name", cfg.model_name);
  dbl1("model", "u_max", cfg.u_max);
  dbl1("model", "d_max", cfg.d_max);
  dbl1("model", "v_u", cfg.v_u);
  dbl1("model", "v_d", cfg.v_d);
  dbl1("model", "speed", cfg.speed);
  int1("model", "n_controls", cfg.n_controls);
  int1("model", "n_disturbances", cfg.n_disturbances);

  dbl_list("grid", "lower", cfg.grid_lower);
  dbl_list("grid", "upper", cfg.grid_upper);
  if (raw.has("grid", "nodes")) {
    cfg.grid_nodes.clear();
    for (const auto& t : raw.tokens("grid", "nodes"))
      cfg.grid_nodes.push_back(to_int(t, "grid.nodes"));
  }
  if (raw.has("grid", "periodic")) {
    cfg.grid_periodic.clear();
    for (const auto& t : raw.tokens("grid", "periodic"))
      cfg.grid_periodic.push_back(to_bool(t, "grid.periodic") ? 1 : 0);
  }

  str1("target", "shape", cfg.target_shape);
  dbl_list("target", "lower", cfg.target_lower);
  dbl_list("target", "upper", cfg.target_upper);
  dbl1("target", "radius", cfg.target_radius);
  int1("target", "axis1", cfg.target_axis1);
  int1("target", "axis2", cfg.target_axis2);
  if (raw.has("target", "clip_bound")) {
    const std::string& t = raw.tokens("target", "clip_bound").at(0);
    if (t != "auto") cfg.clip_bound = to_double(t, "target.clip_bound");
  }

  str1("output", "dir", cfg.output_dir);
  bool1("output", "values", cfg.export_values);
  bool1("output", "report", cfg.export_report);
  bool1("output", "contours", cfg.export_contours);
  bool1("output", "svg", cfg.export_svg);
  if (raw.has("output", "contour_levels"))
    cfg.contour_levels = raw.tokens("output", "contour_levels");
  int1("output", "slice_axis", cfg.slice_axis);
  dbl_list("output", "slice_coords", cfg.slice_coords);

  str1("tdlearn", "dataset", cfg.td_dataset);
  dbl_list("tdlearn", "rollout_x0", cfg.td_rollout_x0);
  int1("tdlearn", "rollout_steps", cfg.td_rollout_steps);
  dbl1("tdlearn", "rollout_control", cfg.td_rollout_control);
  if (raw.has("tdlearn", "dt"))
    cfg.td_dt = to_double(raw.tokens("tdlearn", "dt").at(0), "tdlearn.dt");
  str1("tdlearn", "alpha", cfg.td_alpha);
  int1("tdlearn", "passes", cfg.td_passes);
  bool1("tdlearn", "shuffle", cfg.td_shuffle);
  str1("tdlearn", "reference", cfg.td_reference);
  str1("tdlearn", "theta0", cfg.td_theta0);

  return cfg;
}

/// Schema-level validation shared by every subcommand. Referenced files must
/// exist at parse time.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.kind != "mr" && cfg.kind != "mdr" && cfg.kind != "sdr")
    throw ConfigError("problem.kind must be one of mr|mdr|sdr, got '" + cfg.kind + "'");
  if ((cfg.kind == "mdr" || cfg.kind == "sdr") && !(cfg.lambda > 0.0))
    throw ConfigError("problem.lambda must be > 0 for kind " + cfg.kind);
  if (!(cfg.epsilon > 0.0)) throw ConfigError("problem.epsilon must be > 0");
  if (cfg.method != "vi" && cfg.method != "pi" && cfg.method != "multigrid" &&
      cfg.method != "warmstart")
    throw ConfigError("problem.method must be one of vi|pi|multigrid|warmstart");
  if (cfg.method == "pi" && cfg.n_disturbances > 0)
    throw ConfigError("method pi requires a one-player model (no disturbance)");
  if (cfg.method == "pi" && cfg.kind != "mdr")
    throw ConfigError("method pi is only available for kind mdr");
  if (cfg.method == "multigrid" && cfg.multigrid_levels < 1)
    throw ConfigError("problem.multigrid_levels must be >= 1");
  if (cfg.method == "warmstart") {
    if (cfg.warmstart_values.empty())
      throw ConfigError("method warmstart requires problem.warmstart_values");
    if (!std::filesystem::exists(cfg.warmstart_values))
      throw ConfigError("warmstart values file does not exist: " + cfg.warmstart_values);
  }
  if (cfg.init.rfind("file:", 0) == 0) {
    const std::string path = cfg.init.substr(5);
    if (!std::filesystem::exists(path))
      throw ConfigError("init values file does not exist: " + path);
  } else if (cfg.init != "default" && cfg.init != "zeros") {
    throw ConfigError("problem.init must be default|zeros|file:<path>");
  }
  if (cfg.model_name.empty()) throw ConfigError("model.name is required");
  if (cfg.model_name != "double_integrator" && cfg.model_name != "pursuit_evasion" &&
      cfg.model_name != "chain1d")
    throw ConfigError("unknown model: " + cfg.model_name);
  if (cfg.grid_lower.empty() || cfg.grid_lower.size() != cfg.grid_upper.size() ||
      cfg.grid_lower.size() != cfg.grid_nodes.size())
    throw ConfigError("grid.lower/upper/nodes must be present with equal lengths");
  if (!cfg.grid_periodic.empty() && cfg.grid_periodic.size() != cfg.grid_lower.size())
    throw ConfigError("grid.periodic length mismatch");
  if (!cfg.td_dataset.empty() && !std::filesystem::exists(cfg.td_dataset))
    throw ConfigError("tdlearn dataset does not exist: " + cfg.td_dataset);
  if (cfg.dt && !(*cfg.dt > 0.0)) throw ConfigError("problem.dt must be > 0");
  cfg.make_target();  // shape-level validation
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  RunConfig cfg = parse_config_text(is, path.string());
  return cfg;
}

}  // namespace mdr
