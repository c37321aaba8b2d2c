#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/config.hpp"

namespace mdr {

/// Built-in benchmark parameterizations. The same configurations are checked
/// in as files under presets/; the builtins make `--preset` independent of
/// the working directory.
inline std::vector<std::string> preset_names() {
  return {"di-mdr", "di-mdr-lam02", "di-mr",  "di-ml", "di-mh",
          "pe-mdr", "pe-mr",        "pe-me",  "pe-mp", "chain-td"};
}

inline RunConfig make_preset(const std::string& name) {
  RunConfig cfg;

  auto di_base = [&]() {
    cfg.model_name = "double_integrator";
    cfg.u_max = 2.0;
    cfg.n_controls = 2;
    cfg.n_disturbances = 0;
    cfg.grid_lower = {-1.0, -5.0};
    cfg.grid_upper = {5.0, 5.0};
    cfg.grid_nodes = {161, 161};
    cfg.grid_periodic = {0, 0};
    cfg.target_shape = "box_complement";
    cfg.target_lower = {0.0, -3.0};
    cfg.target_upper = {4.0, 3.0};
    cfg.kind = "mdr";
    cfg.lambda = 0.1;
    cfg.tau_bar = 2.0;
    cfg.epsilon = 1e-3;
    cfg.method = "vi";
    cfg.export_contours = true;
    cfg.export_svg = true;
  };

  auto pe_base = [&]() {
    cfg.model_name = "pursuit_evasion";
    cfg.v_u = 5.0;
    cfg.v_d = 5.0;
    cfg.u_max = 1.0;
    cfg.d_max = 1.0;
    cfg.n_controls = 11;
    cfg.n_disturbances = 11;
    cfg.grid_lower = {-6.0, -10.0, 0.0};
    cfg.grid_upper = {20.0, 10.0, 2.0 * std::numbers::pi};
    cfg.grid_nodes = {41, 41, 41};
    cfg.grid_periodic = {0, 0, 1};
    cfg.target_shape = "cylinder";
    cfg.target_radius = 5.0;
    cfg.target_axis1 = 0;
    cfg.target_axis2 = 1;
    cfg.kind = "mdr";
    cfg.lambda = 0.01;
    cfg.tau_bar = 2.0;
    cfg.epsilon = 1e-3;
    cfg.method = "vi";
    cfg.export_contours = true;
    cfg.export_svg = true;
    cfg.slice_axis = 2;
    cfg.slice_coords = {0.0, std::numbers::pi / 2.0, std::numbers::pi};
  };

  if (name == "di-mdr") {
    di_base();
  } else if (name == "di-mdr-lam02") {
    di_base();
    cfg.lambda = 0.2;
  } else if (name == "di-mr") {
    di_base();
    cfg.kind = "mr";
    cfg.lambda = 0.0;
    cfg.contour_levels = {"under"};
  } else if (name == "di-ml") {
    di_base();
    cfg.u_max = 4.0;
  } else if (name == "di-mh") {
    di_base();
    cfg.u_max = 1.0;
  } else if (name == "pe-mdr") {
    pe_base();
  } else if (name == "pe-mr") {
    pe_base();
    cfg.kind = "mr";
    cfg.lambda = 0.0;
    cfg.contour_levels = {"under"};
  } else if (name == "pe-me") {
    pe_base();
    cfg.u_max = 1.5;
  } else if (name == "pe-mp") {
    pe_base();
    cfg.d_max = 1.5;
  } else if (name == "chain-td") {
    cfg.model_name = "chain1d";
    cfg.speed = 2.0;
    cfg.grid_lower = {0.0};
    cfg.grid_upper = {2.0};
    cfg.grid_nodes = {2};
    cfg.grid_periodic = {0};
    cfg.target_shape = "box_complement";
    cfg.target_lower = {-0.5};
    cfg.target_upper = {1.0};
    cfg.kind = "mdr";
    cfg.lambda = 0.1;
    cfg.dt = 1.0;
    cfg.epsilon = 1e-6;
    cfg.method = "vi";
    cfg.td_rollout_x0 = {0.0};
    cfg.td_rollout_steps = 2;
    cfg.td_dt = 1.0;
    cfg.td_alpha = "decay";
    cfg.td_passes = 500;
    cfg.td_reference = "solve";
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return cfg;
}

}  // namespace mdr
