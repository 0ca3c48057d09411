#include "cct/config.hpp"

#include "cct/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cct {

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing required key '" + key + "' in " + where);
  return *it;
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError("'" + what + "' must be a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError("'" + what + "' must be an integer");
  return v.get<long>();
}

Vector as_vector(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError("'" + what + "' must be an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], what + "[" + std::to_string(i) + "]");
  return out;
}

// Row-major array of rows; every row must have the same length.
Matrix as_matrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError("'" + what + "' must be a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array()) throw ConfigError("'" + what + "' must be an array of rows");
  const std::size_t cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      throw ConfigError("'" + what + "' has rows of unequal length");
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          as_number(v[i][j], what + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  return out;
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

InitialDistribution parse_dist(const json& d) {
  if (!d.is_object()) throw ConfigError("'dist' must be an object");
  const std::string kind = [&] {
    const json& k = require(d, "kind", "dist");
    if (!k.is_string()) throw ConfigError("'dist.kind' must be a string");
    return k.get<std::string>();
  }();
  if (kind == "uniform_box") {
    reject_unknown(d, {"kind", "bounds"}, "dist");
    const Matrix b = as_matrix(require(d, "bounds", "dist"), "dist.bounds");
    if (b.rows() != 2) throw ConfigError("'dist.bounds' must be [lower, upper]");
    return UniformBox{b.row(0).transpose(), b.row(1).transpose()};
  }
  if (kind == "empirical") {
    reject_unknown(d, {"kind", "points"}, "dist");
    return Empirical{as_matrix(require(d, "points", "dist"), "dist.points").transpose()};
  }
  throw ConfigError("unknown dist.kind '" + kind + "' (expected uniform_box or empirical)");
}

void parse_solver(const json& s, SolverConfig& c) {
  if (!s.is_object()) throw ConfigError("'solver' must be an object");
  reject_unknown(s,
                 {"dt", "dt_fwd", "s_in", "delta", "max_inner", "max_outer", "kappa", "P0", "g0",
                  "quad_nodes", "cap", "N", "N_list", "seeds", "P_grid_step", "scan_dt", "t_max",
                  "force_simplex", "strategy"},
                 "solver");
  auto num = [&](const char* key, double& dst) {
    if (auto it = s.find(key); it != s.end()) dst = as_number(*it, std::string("solver.") + key);
  };
  auto integer = [&](const char* key, auto& dst) {
    if (auto it = s.find(key); it != s.end())
      dst = static_cast<std::decay_t<decltype(dst)>>(as_integer(*it, std::string("solver.") + key));
  };
  num("dt", c.dt);
  num("dt_fwd", c.dt_fwd);
  num("s_in", c.s_in);
  num("delta", c.delta);
  integer("max_inner", c.max_inner);
  integer("max_outer", c.max_outer);
  num("kappa", c.kappa);
  if (auto it = s.find("P0"); it != s.end()) c.P0 = as_vector(*it, "solver.P0");
  if (auto it = s.find("g0"); it != s.end()) c.g0 = as_vector(*it, "solver.g0");
  integer("quad_nodes", c.quad_nodes);
  num("cap", c.cap);
  integer("N", c.N);
  if (auto it = s.find("N_list"); it != s.end()) {
    if (!it->is_array()) throw ConfigError("'solver.N_list' must be an array of integers");
    c.N_list.clear();
    for (const auto& v : *it) c.N_list.push_back(static_cast<int>(as_integer(v, "solver.N_list")));
  }
  integer("seeds", c.seeds);
  num("P_grid_step", c.P_grid_step);
  num("scan_dt", c.scan_dt);
  num("t_max", c.t_max);
  if (auto it = s.find("force_simplex"); it != s.end()) {
    if (!it->is_boolean()) throw ConfigError("'solver.force_simplex' must be a boolean");
    c.force_simplex = it->get<bool>();
  }
  if (auto it = s.find("strategy"); it != s.end()) {
    if (!it->is_string()) throw ConfigError("'solver.strategy' must be a string");
    c.strategy = it->get<std::string>();
    if (c.strategy != "continuum" && c.strategy != "finite")
      throw ConfigError("'solver.strategy' must be \"continuum\" or \"finite\"");
  }
  if (!(c.s_in > 0.0) || !(c.delta > 0.0)) throw ConfigError("solver.s_in and solver.delta must be positive");
  if (c.dt < 0.0 || c.dt_fwd < 0.0) throw ConfigError("solver step sizes must be nonnegative");
  if (c.seeds < 1) throw ConfigError("solver.seeds must be at least 1");
  if (c.N < 0) throw ConfigError("solver.N must be nonnegative");
  for (int N : c.N_list)
    if (N < 1) throw ConfigError("solver.N_list entries must be positive");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                      e.what());
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, {"n", "m", "A", "B", "R_x", "R_d", "R_u", "M", "destinations", "T", "dist", "solver"},
                 "configuration");

  RunConfig cfg;
  ProblemSpec& s = cfg.spec;
  const std::string top = "configuration";
  s.n = static_cast<int>(as_integer(require(doc, "n", top), "n"));
  s.m = static_cast<int>(as_integer(require(doc, "m", top), "m"));
  s.A = as_matrix(require(doc, "A", top), "A");
  s.B = as_matrix(require(doc, "B", top), "B");
  s.R_x = as_matrix(require(doc, "R_x", top), "R_x");
  s.R_d = as_matrix(require(doc, "R_d", top), "R_d");
  s.R_u = as_matrix(require(doc, "R_u", top), "R_u");
  s.M = as_matrix(require(doc, "M", top), "M");
  const json& dests = require(doc, "destinations", top);
  if (!dests.is_array()) throw ConfigError("'destinations' must be an array of points");
  for (std::size_t j = 0; j < dests.size(); ++j)
    s.destinations.push_back(as_vector(dests[j], "destinations[" + std::to_string(j) + "]"));
  s.T = as_number(require(doc, "T", top), "T");
  s.dist = parse_dist(require(doc, "dist", top));
  if (auto it = doc.find("solver"); it != doc.end()) parse_solver(*it, cfg.solver);

  require_valid(s);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string to_json_text(const RunConfig& c) {
  const ProblemSpec& s = c.spec;
  json doc;
  doc["n"] = s.n;
  doc["m"] = s.m;
  doc["A"] = matrix_json(s.A);
  doc["B"] = matrix_json(s.B);
  doc["R_x"] = matrix_json(s.R_x);
  doc["R_d"] = matrix_json(s.R_d);
  doc["R_u"] = matrix_json(s.R_u);
  doc["M"] = matrix_json(s.M);
  json dests = json::array();
  for (const auto& d : s.destinations) dests.push_back(vector_json(d));
  doc["destinations"] = dests;
  doc["T"] = s.T;
  if (const auto* box = std::get_if<UniformBox>(&s.dist)) {
    Matrix b(2, box->lower.size());
    b.row(0) = box->lower.transpose();
    b.row(1) = box->upper.transpose();
    doc["dist"] = {{"kind", "uniform_box"}, {"bounds", matrix_json(b)}};
  } else {
    const auto& e = std::get<Empirical>(s.dist);
    doc["dist"] = {{"kind", "empirical"}, {"points", matrix_json(e.points.transpose())}};
  }
  const SolverConfig& v = c.solver;
  json solver = {{"dt", v.dt},
                 {"dt_fwd", v.dt_fwd},
                 {"s_in", v.s_in},
                 {"delta", v.delta},
                 {"max_inner", v.max_inner},
                 {"max_outer", v.max_outer},
                 {"kappa", v.kappa},
                 {"quad_nodes", v.quad_nodes},
                 {"cap", v.cap},
                 {"N", v.N},
                 {"N_list", v.N_list},
                 {"seeds", v.seeds},
                 {"P_grid_step", v.P_grid_step},
                 {"scan_dt", v.scan_dt},
                 {"t_max", v.t_max},
                 {"force_simplex", v.force_simplex},
                 {"strategy", v.strategy}};
  if (v.P0) solver["P0"] = vector_json(*v.P0);
  if (v.g0) solver["g0"] = vector_json(*v.g0);
  doc["solver"] = solver;
  return doc.dump(2) + "\n";
}

int population_size(const RunConfig& c) {
  if (c.solver.N > 0) return c.solver.N;
  if (const auto* e = std::get_if<Empirical>(&c.spec.dist)) return static_cast<int>(e->points.cols());
  return 20;
}

}  // namespace cct
