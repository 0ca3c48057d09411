#pragma once

#include "cct/sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cct {

/// Shortest-form independent rendering with 17 significant digits.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// Writes header and rows with '\n' line endings. Throws std::runtime_error on I/O failure.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

CsvTable read_csv(const std::filesystem::path& path);

/// Seed-aggregated comparison data, columns
/// P_1, J, J_N_mean, J_N_std, J_tilde_mean, J_tilde_std, F_N_mean.
/// Throws std::invalid_argument on an empty table.
void emit_plotdata(const std::vector<PlotRow>& table, const std::filesystem::path& path);

}  // namespace cct
