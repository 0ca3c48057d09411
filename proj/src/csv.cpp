#include "cct/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cct {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header.empty() && row.size() != header.size())
    throw std::invalid_argument("CsvTable: row width does not match the header");
  rows.push_back(std::move(row));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.add_row(std::move(cells));
    }
  }
  return t;
}

void emit_plotdata(const std::vector<PlotRow>& table, const std::filesystem::path& path) {
  if (table.empty()) throw std::invalid_argument("emit_plotdata: empty table");
  CsvTable t;
  t.header = {"P_1", "J", "J_N_mean", "J_N_std", "J_tilde_mean", "J_tilde_std", "F_N_mean"};
  for (const auto& r : table)
    t.add_row({format_double(r.P1), format_double(r.J), format_double(r.J_N_mean),
               format_double(r.J_N_std), format_double(r.J_tilde_mean), format_double(r.J_tilde_std),
               format_double(r.F_N_mean)});
  write_csv(path, t);
}

}  // namespace cct
