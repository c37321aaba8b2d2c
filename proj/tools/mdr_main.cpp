// Command-line driver: grid-based reachable-set solves via discounted
// fixed-point iteration, cross-run comparisons, and temporal-difference
// training of the grid interpolant.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mdr/mdr.hpp"

namespace {

struct CommonFlags {
  std::string preset;
  std::string output_dir;
  std::optional<double> epsilon;
  int threads = 0;
  std::uint64_t seed = 0;
};

mdr::RunConfig load_config(const std::string& path, const CommonFlags& flags) {
  mdr::RunConfig cfg;
  if (!flags.preset.empty()) {
    cfg = mdr::make_preset(flags.preset);
  } else {
    if (path.empty())
      throw mdr::ConfigError("no config file given (and no --preset selected)");
    cfg = mdr::parse_config(path);
  }
  if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
  if (flags.epsilon) cfg.epsilon = *flags.epsilon;
  cfg.threads = flags.threads;
  cfg.seed = flags.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-based reachable set solver (minimum discounted reward)"};
  app.require_subcommand(1);

  CommonFlags flags;
  app.add_option("--output-dir", flags.output_dir, "override the output directory");
  app.add_option("--epsilon", flags.epsilon, "override the convergence threshold");
  app.add_option("--threads", flags.threads, "worker threads (0 = hardware)");
  app.add_option("--seed", flags.seed, "RNG seed (TD sample shuffling)");
  app.add_option("--preset", flags.preset, "use a built-in benchmark preset");

  std::string config_path, config_path_b;
  auto* solve = app.add_subcommand("solve", "run a configured solve");
  solve->add_option("config", config_path, "config file");

  auto* compare = app.add_subcommand("compare", "solve two configs and compare");
  compare->add_option("config_a", config_path, "first config file")->required();
  compare->add_option("config_b", config_path_b, "second config file")->required();

  auto* tdlearn = app.add_subcommand("tdlearn", "temporal-difference training");
  tdlearn->add_option("config", config_path, "config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return mdr::run_solve(load_config(config_path, flags), std::cout);
    if (compare->parsed()) {
      CommonFlags per_file = flags;
      per_file.preset.clear();
      mdr::RunConfig a = load_config(config_path, per_file);
      mdr::RunConfig b = load_config(config_path_b, per_file);
      return mdr::run_compare(a, b, flags.output_dir, std::cout);
    }
    if (tdlearn->parsed())
      return mdr::run_tdlearn(load_config(config_path, flags), std::cout);
  } catch (const mdr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mdr::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mdr::kExitConfigError;
  }
  return mdr::kExitConfigError;
}
