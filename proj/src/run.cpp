#include "cct/run.hpp"

#include "cct/coeffs.hpp"
#include "cct/continuum.hpp"
#include "cct/csv.hpp"
#include "cct/errors.hpp"
#include "cct/escape.hpp"
#include "cct/finite.hpp"
#include "cct/sim.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

namespace cct {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v[i]);
  }
  return s;
}

std::vector<std::string> indexed(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int k = 1; k <= count; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

template <class... Parts>
std::vector<std::string> cat(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

std::vector<std::string> cells(const Vector& v) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(fmt(v[i]));
  return out;
}

EscapeOptions escape_options(const SolverConfig& s) {
  EscapeOptions e;
  e.scan_dt = s.scan_dt;
  e.t_max = s.t_max;
  return e;
}

double coeff_step(const RunConfig& c) { return c.solver.dt > 0.0 ? c.solver.dt : default_step(c.spec.T); }

ContinuumParams continuum_params(const SolverConfig& s) {
  ContinuumParams p;
  p.P0 = s.P0;
  p.g0 = s.g0;
  p.s_in = s.s_in;
  p.delta = s.delta;
  p.max_inner = s.max_inner;
  p.max_outer = s.max_outer;
  p.kappa = s.kappa;
  p.quadrature.nodes_per_axis = s.quad_nodes;
  return p;
}

void add_escape(Summary& sum, const EscapeReport& r) {
  sum.emplace_back("escape_time", fmt(r.escape_time));
  sum.emplace_back("escape_method", r.method);
  sum.emplace_back("horizon_ok", r.horizon_ok ? "true" : "false");
  sum.emplace_back("margin", fmt(r.margin));
}

Summary cmd_escape(const RunConfig& c, const RunOptions& o) {
  const EscapeReport r = escape_time(c.spec, escape_options(c.solver));
  CsvTable t;
  t.header = {"t", "delta"};
  for (std::size_t k = 0; k < r.scan.t.size(); ++k) t.add_row({fmt(r.scan.t[k]), fmt(r.scan.value[k])});
  write_csv(o.out_dir / "escape.csv", t);
  Summary sum;
  sum.emplace_back("T", fmt(c.spec.T));
  add_escape(sum, r);
  sum.emplace_back("t_max", fmt(r.t_max));
  sum.emplace_back("touch_flagged", r.touch_flagged ? "true" : "false");
  if (r.equilibrium) {
    const Matrix& e = *r.equilibrium;
    sum.emplace_back("equilibrium", join(Eigen::Map<const Vector>(e.data(), e.size())));
  }
  return sum;
}

Summary cmd_solve_finite(const RunConfig& c, const RunOptions& o) {
  const ProblemSpec& spec = c.spec;
  const EscapeReport er = assert_horizon(spec, o.override_horizon, escape_options(c.solver));
  const int N = population_size(c);
  const Matrix X0 = sample_initial_states(spec.dist, N, o.seed);
  const FiniteCoeffs fc = solve_finite_coeffs(spec, N, coeff_step(c));
  OtOptions ot;
  ot.force_simplex = c.solver.force_simplex;
  const FiniteSolution sol = solve_finite(spec, fc, X0, c.solver.cap, ot);

  const int D = spec.D();
  CsvTable table;
  table.header = cat(indexed("P_", D), std::vector<std::string>{"J_N"});
  for (const auto& [P, J] : sol.cost_table) table.add_row(cat(cells(P.values()), std::vector{fmt(J)}));
  write_csv(o.out_dir / "cost_table.csv", table);

  CsvTable assign;
  assign.header = cat(std::vector<std::string>{"agent"}, indexed("x0_", spec.n),
                      std::vector<std::string>{"destination"});
  for (int i = 0; i < N; ++i)
    assign.add_row(cat(std::vector{std::to_string(i + 1)}, cells(X0.col(i)),
                       std::vector{std::to_string(sol.lambda[i] + 1)}));
  write_csv(o.out_dir / "assignment.csv", assign);

  Summary sum;
  add_escape(sum, er);
  sum.emplace_back("N", std::to_string(N));
  sum.emplace_back("seed", std::to_string(o.seed));
  sum.emplace_back("table_size", std::to_string(sol.cost_table.size()));
  sum.emplace_back("P_opt", join(sol.P_opt.values()));
  sum.emplace_back("J_opt", fmt(sol.J_opt));
  return sum;
}

Summary cmd_solve_continuum(const RunConfig& c, const RunOptions& o) {
  const ProblemSpec& spec = c.spec;
  const EscapeReport er = assert_horizon(spec, o.override_horizon, escape_options(c.solver));
  const LimitCoeffs lc = solve_limit_coeffs(spec, coeff_step(c));
  const ContinuumSolution sol = solve_continuum(spec, lc, continuum_params(c.solver));
  const int D = spec.D();

  CsvTable it;
  it.header = cat(std::vector<std::string>{"iter"}, indexed("P_", D), std::vector<std::string>{"J"});
  for (std::size_t k = 0; k < sol.iterates.size(); ++k)
    it.add_row(cat(std::vector{std::to_string(k)}, cells(sol.iterates[k].first.values()),
                   std::vector{fmt(sol.iterates[k].second)}));
  write_csv(o.out_dir / "iterates.csv", it);

  CsvTable w;
  w.header = {"destination", "g", "measure", "site_norm"};
  for (int j = 0; j < D; ++j)
    w.add_row({std::to_string(j + 1), fmt(sol.g_star.g[j]), fmt(sol.g_star.measures[j]),
               fmt(lc.beta.front().col(j).norm())});
  write_csv(o.out_dir / "weights.csv", w);

  Summary sum;
  add_escape(sum, er);
  sum.emplace_back("P_star", join(sol.P_star.values()));
  sum.emplace_back("J_star", fmt(sol.J_star));
  sum.emplace_back("g_star", join(sol.g_star.g));
  sum.emplace_back("outer_iterations", std::to_string(sol.outer_iterations));
  return sum;
}

Summary cmd_simulate(const RunConfig& c, const RunOptions& o) {
  const ProblemSpec& spec = c.spec;
  const EscapeReport er = assert_horizon(spec, o.override_horizon, escape_options(c.solver));
  const int N = population_size(c);
  const Matrix X0 = sample_initial_states(spec.dist, N, o.seed);
  SimOptions so;
  so.dt_fwd = c.solver.dt_fwd;
  so.check_horizon = false;

  Summary sum;
  add_escape(sum, er);
  sum.emplace_back("N", std::to_string(N));
  sum.emplace_back("seed", std::to_string(o.seed));
  sum.emplace_back("strategy", c.solver.strategy);

  TrajectoryBundle b;
  if (c.solver.strategy == "finite") {
    const FiniteCoeffs fc = solve_finite_coeffs(spec, N, coeff_step(c));
    const FiniteSolution sol = solve_finite(spec, fc, X0, c.solver.cap);
    b = simulate(spec, X0, make_strategy(sol, fc), so);
    sum.emplace_back("P", join(sol.P_opt.values()));
    sum.emplace_back("J_predicted", fmt(sol.J_opt));
  } else {
    const LimitCoeffs lc = solve_limit_coeffs(spec, coeff_step(c));
    const ContinuumSolution sol = solve_continuum(spec, lc, continuum_params(c.solver));
    b = simulate(spec, X0, make_strategy(sol, lc), so);
    sum.emplace_back("P", join(sol.P_star.values()));
    sum.emplace_back("J_predicted", fmt(sol.J_star));
    sum.emplace_back("occupancy", join(occupancy(X0, lc.beta.front(), sol.g_star.g).values()));
  }

  CsvTable traj;
  traj.header = cat(std::vector<std::string>{"t", "agent"}, indexed("x_", spec.n), indexed("u_", spec.m));
  for (int i = 0; i < N; ++i)
    for (std::size_t k = 0; k < b.times.size(); ++k)
      traj.add_row(cat(std::vector{fmt(b.times[k]), std::to_string(i + 1)}, cells(b.states[k].col(i)),
                       cells(b.controls[k].col(i))));
  write_csv(o.out_dir / "trajectories.csv", traj);

  CsvTable means;
  means.header = cat(std::vector<std::string>{"t"}, indexed("xbar_", spec.n));
  for (std::size_t k = 0; k < b.times.size(); ++k)
    means.add_row(cat(std::vector{fmt(b.times[k])}, cells(b.mean_path[k])));
  write_csv(o.out_dir / "means.csv", means);

  std::vector<int> counts(spec.D(), 0);
  for (int j : b.assignments) ++counts[j];
  std::string cs;
  for (int j = 0; j < spec.D(); ++j) cs += (j ? " " : "") + std::to_string(counts[j]);
  sum.emplace_back("destination_counts", cs);
  sum.emplace_back("realized_cost", fmt(b.realized_cost));
  return sum;
}

Summary cmd_compare(const RunConfig& c, const RunOptions& o) {
  const ProblemSpec& spec = c.spec;
  const EscapeReport er = assert_horizon(spec, o.override_horizon, escape_options(c.solver));
  std::vector<std::uint64_t> seeds(c.solver.seeds);
  std::iota(seeds.begin(), seeds.end(), o.seed);
  ComparisonOptions co;
  co.dt = c.solver.dt;
  co.continuum = continuum_params(c.solver);
  co.finite_cap = c.solver.cap;
  co.override_horizon = true;  // already certified above
  const ComparisonTable table = comparison_experiment(spec, c.solver.N_list, seeds, c.solver.P_grid_step, co);
  const int D = spec.D();

  CsvTable t;
  t.header = cat(std::vector<std::string>{"N", "seed"}, indexed("P_", D), indexed("F_", D),
                 std::vector<std::string>{"J", "J_N", "J_tilde"});
  for (const auto& r : table.rows)
    t.add_row(cat(std::vector{std::to_string(r.N), std::to_string(r.seed)}, cells(r.P), cells(r.F),
                  std::vector{fmt(r.J), fmt(r.J_N), fmt(r.J_tilde)}));
  write_csv(o.out_dir / "compare.csv", t);

  CsvTable opt;
  opt.header = cat(std::vector<std::string>{"N", "seed"}, indexed("P_opt_", D),
                   std::vector<std::string>{"J_N_opt"}, indexed("F_star_", D),
                   std::vector<std::string>{"J_tilde_star"});
  for (const auto& r : table.optima)
    opt.add_row(cat(std::vector{std::to_string(r.N), std::to_string(r.seed)}, cells(r.P_opt),
                    std::vector{fmt(r.J_N_opt)}, cells(r.F_star), std::vector{fmt(r.J_tilde_star)}));
  write_csv(o.out_dir / "optima.csv", opt);

  const auto plot = aggregate(table);
  Summary sum;
  add_escape(sum, er);
  sum.emplace_back("P_star", join(table.P_star));
  sum.emplace_back("J_star", fmt(table.J_star));
  for (int N : c.solver.N_list) {
    std::vector<PlotRow> rows;
    std::copy_if(plot.begin(), plot.end(), std::back_inserter(rows), [N](const PlotRow& r) { return r.N == N; });
    if (!rows.empty()) emit_plotdata(rows, o.out_dir / ("plot_N" + std::to_string(N) + ".csv"));
    std::vector<double> gap, jt;
    for (const auto& r : table.optima) {
      if (r.N != N) continue;
      gap.push_back(std::abs(r.J_N_opt - r.J_tilde_star));
      jt.push_back(r.J_tilde_star);
    }
    if (gap.empty()) continue;
    const double mean_gap = std::accumulate(gap.begin(), gap.end(), 0.0) / gap.size();
    sum.emplace_back("mean_gap_N" + std::to_string(N), fmt(mean_gap));
    sum.emplace_back("std_J_tilde_N" + std::to_string(N), fmt(sample_std(jt)));
  }
  return sum;
}

}  // namespace

Summary run(const std::string& command, const RunConfig& config, const RunOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  Summary sum{{"command", command}};
  Summary body;
  if (command == "escape")
    body = cmd_escape(config, opts);
  else if (command == "solve-finite")
    body = cmd_solve_finite(config, opts);
  else if (command == "solve-continuum")
    body = cmd_solve_continuum(config, opts);
  else if (command == "simulate")
    body = cmd_simulate(config, opts);
  else if (command == "compare")
    body = cmd_compare(config, opts);
  else
    throw ConfigError("unknown command '" + command + "'");
  sum.insert(sum.end(), body.begin(), body.end());
  return sum;
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Summary sum;
  std::string error_name, error_message;
  try {
    const RunConfig cfg = parse_config(config_path);
    sum = run(command, cfg, opts);
  } catch (const Error& e) {
    error_name = e.name();
    error_message = e.what();
  } catch (const std::exception& e) {
    error_name = "RuntimeError";
    error_message = e.what();
  }
  std::string text;
  for (const auto& [k, v] : sum) text += k + "=" + v + "\n";
  if (error_name.empty()) {
    text += "STATUS=OK\n";
  } else {
    text += "ERROR=" + error_name + "\nSTATUS=FAILED\n";
    err << error_name << ": " << error_message << "\n";
  }
  out << text;
  try {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream f(opts.out_dir / "summary.txt", std::ios::binary | std::ios::trunc);
    f << text;
  } catch (const std::exception&) {
    if (error_name.empty()) return 1;
  }
  return error_name.empty() ? 0 : 2;
}

}  // namespace cct
