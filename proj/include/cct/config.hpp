#pragma once

#include "cct/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cct {

struct SolverConfig {
  double dt = 0.0;      // coefficient step, 0 -> T / 2000
  double dt_fwd = 0.0;  // simulation step, 0 -> coefficient step
  double s_in = 3500.0;
  double delta = 5e-5;
  long max_inner = 100000;
  int max_outer = 500;
  double kappa = 0.5;
  std::optional<Vector> P0;
  std::optional<Vector> g0;
  int quad_nodes = 0;  // per axis, 0 -> dimension default
  double cap = 2e5;
  int N = 0;  // population for solve-finite / simulate, 0 -> 20 (or the empirical size)
  std::vector<int> N_list{100, 1000};
  int seeds = 20;
  double P_grid_step = 0.1;
  double scan_dt = 0.0;
  double t_max = 0.0;
  bool force_simplex = false;
  std::string strategy = "continuum";  // simulate: "continuum" or "finite"
};

struct RunConfig {
  ProblemSpec spec;
  SolverConfig solver;
};

/// Parses and validates a JSON configuration document. Throws ConfigError
/// (syntax, missing or unknown keys, malformed arrays) or ValidationError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Serializes a configuration; parse_config_text(to_json_text(c)) is equivalent to c.
std::string to_json_text(const RunConfig& config);

/// Population used by the finite solver and the simulator.
int population_size(const RunConfig& config);

}  // namespace cct
