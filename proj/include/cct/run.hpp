#pragma once

#include "cct/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cct {

struct RunOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  bool override_horizon = false;
};

using Summary = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"escape", "solve-finite", "solve-continuum", "simulate",
                                              "compare"};
  return names;
}

/// Executes one subcommand, writing its CSV files into opts.out_dir, and
/// returns the summary entries (without the trailing status line).
/// Errors propagate as exceptions.
Summary run(const std::string& command, const RunConfig& config, const RunOptions& opts);

/// Parses the configuration, runs the command, writes summary.txt and
/// mirrors it on `out`. Returns the process exit status; failures are
/// reported on `err` by error name.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace cct
