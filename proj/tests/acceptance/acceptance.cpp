#include "cct/coeffs.hpp"
#include "cct/config.hpp"
#include "cct/continuum.hpp"
#include "cct/escape.hpp"
#include "cct/finite.hpp"
#include "cct/run.hpp"
#include "cct/sim.hpp"
#include "cct/transport.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace cct;
using cct::testing::brute_force_assignment;
using cct::testing::coupled_psi;
using cct::testing::reference_spec;
using cct::testing::random_spec;
using cct::testing::vec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

template <class F>
void for_each_assignment(int N, int D, F&& f) {
  std::vector<int> lambda(N, 0);
  for (;;) {
    f(lambda);
    int i = 0;
    while (i < N && ++lambda[i] == D) lambda[i++] = 0;
    if (i == N) return;
  }
}

const ProblemSpec& reference() {
  static const ProblemSpec s = reference_spec();
  return s;
}

const LimitCoeffs& reference_coeffs() {
  static const LimitCoeffs lc = solve_limit_coeffs(reference(), default_step(reference().T));
  return lc;
}

Vector p2(double p) { return vec({p, 1 - p}); }

Outcome escape_criterion() {
  const auto t0 = Clock::now();
  const EscapeReport r = escape_time(reference());
  const double secs = seconds_since(t0);
  const bool ok = std::abs(r.escape_time - 23.4135) <= 0.01 && secs < 10.0;
  return {ok, fmt("escape_time=%.9f target=23.4135+-0.01 method=%s runtime=%.2fs", r.escape_time,
                  r.method.c_str(), secs)};
}

Outcome continuum_optimum() {
  const auto t0 = Clock::now();
  const ContinuumSolution sol = solve_continuum(reference(), reference_coeffs());
  const double secs = seconds_since(t0);
  const Vector target = vec({0.5535, 0.4465});
  const double err = (sol.P_star.values() - target).cwiseAbs().maxCoeff();
  return {err <= 0.01 && secs < 300.0,
          fmt("P_star=[%.6f, %.6f] target=[0.5535, 0.4465]+-0.01 max_dev=%.4f J_star=%.6f outer=%d runtime=%.1fs",
              sol.P_star[0], sol.P_star[1], err, sol.J_star, sol.outer_iterations, secs)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20231);
  std::uniform_int_distribution<int> pickN(2, 4), pickn(1, 2), pickD(1, 3);
  const double dt = 1e-4;
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int N = pickN(rng), n = pickn(rng), D = pickD(rng);
    const auto s = random_spec(rng, n, D);
    const Matrix X0 = sample_initial_states(s.dist, N, 100 + trial);
    FiniteOptions o;
    o.dt = dt;
    const FiniteSolution sol = solve_finite(s, X0, o);
    double best = std::numeric_limits<double>::infinity();
    for_each_assignment(N, D, [&](const std::vector<int>& lambda) {
      best = std::min(best, full_system_oracle(s, N, lambda, X0, dt).cost);
    });
    const double e = rel_err(sol.J_opt, best);
    worst = std::max(worst, e);
    if (e > 1e-6) ++failures;
  }
  return {failures == 0, fmt("instances=20 max_rel_err=%.3e tol=1e-6 failures=%d", worst, failures)};
}

Outcome bellman_consistency() {
  std::mt19937_64 rng(20232);
  std::uniform_int_distribution<int> pickn(1, 2), pickD(1, 3);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < 10; ++k) {
    const int N = 2 + 2 * k;
    const auto s = random_spec(rng, pickn(rng), pickD(rng));
    const auto fc = solve_finite_coeffs(s, N, default_step(s.T));
    const Matrix X0 = sample_initial_states(s.dist, N, 200 + k);
    const FiniteSolution sol = solve_finite(s, fc, X0);
    const double realized = simulate(s, X0, make_strategy(sol, fc)).realized_cost;
    const double e = rel_err(realized, sol.J_opt);
    worst = std::max(worst, e);
    if (e > 1e-4) ++failures;
  }
  return {failures == 0, fmt("instances=10 N=2..20 max_rel_err=%.3e tol=1e-4 failures=%d", worst, failures)};
}

Outcome ot_integrality() {
  std::mt19937_64 rng(20233);
  std::uniform_real_distribution<double> U(0.0, 10.0);
  long checked = 0;
  int failures = 0;
  double worst = 0.0;
  for (int N = 1; N <= 8; ++N)
    for (int D = 1; D <= 3; ++D)
      for (int rep = 0; rep < 3; ++rep) {
        Matrix C(N, D);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < D; ++j) C(i, j) = U(rng);
        for (const auto& P : enumerate_fractions(N, D)) {
          std::vector<int> counts(D);
          for (int j = 0; j < D; ++j) counts[j] = static_cast<int>(std::lround(P[j] * N));
          const double ref = brute_force_assignment(C, counts);
          for (bool force : {false, true}) {
            OtOptions o;
            o.force_simplex = force;
            const auto plan = discrete_ot(C, P, o);
            const double e = std::abs(plan.value - ref);
            worst = std::max(worst, e);
            if (e > 1e-9 || !plan.assignment) ++failures;
            ++checked;
          }
        }
      }
  return {failures == 0, fmt("problems=%ld max_abs_err=%.3e tol=1e-9 failures=%d", checked, worst, failures)};
}

Outcome convexity_suite() {
  std::mt19937_64 rng(20234);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int primal_viol = 0, dual_viol = 0;
  double worst_primal = 0.0, worst_dual = 0.0;
  auto J = [&](double p) { return limit_cost(reference(), reference_coeffs(), p2(p)).J; };
  for (int k = 0; k < 500; ++k) {
    const double p = U(rng), q = U(rng), th = U(rng);
    const double gap = J(th * p + (1 - th) * q) - (th * J(p) + (1 - th) * J(q));
    worst_primal = std::max(worst_primal, gap);
    if (gap > 1e-6) ++primal_viol;
  }
  const Matrix& sites = reference_coeffs().beta.front();
  std::uniform_real_distribution<double> G(-5000.0, 5000.0);
  for (int k = 0; k < 500; ++k) {
    const Vector P = p2(U(rng));
    const Vector g = vec({G(rng), G(rng)}), h = vec({G(rng), G(rng)});
    const double th = U(rng);
    const double mid = dual_value(reference().dist, sites, th * g + (1 - th) * h, P);
    const double chord = th * dual_value(reference().dist, sites, g, P) + (1 - th) * dual_value(reference().dist, sites, h, P);
    const double gap = chord - mid;
    worst_dual = std::max(worst_dual, gap);
    if (gap > 1e-6) ++dual_viol;
  }
  return {primal_viol == 0 && dual_viol == 0,
          fmt("triples=500 J_violations=%d (worst %.3e) dual_violations=%d (worst %.3e) tol=1e-6", primal_viol,
              worst_primal, dual_viol, worst_dual)};
}

Outcome subgradient_check() {
  const double h = 1e-4;
  const Vector v = vec({1.0, -1.0});
  auto J = [&](double p) { return limit_cost(reference(), reference_coeffs(), p2(p)).J; };
  int failures = 0;
  double worst = 0.0, worst_at = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double p = k / 21.0;
    const auto lp = limit_cost(reference(), reference_coeffs(), p2(p));
    const double an = subgradient(reference(), reference_coeffs(), p2(p), lp.weights.g).dot(v);
    const double fd = (J(p + h) - J(p - h)) / (2 * h);
    const double e = std::abs(fd - an) / std::abs(an);
    if (e > worst) {
      worst = e;
      worst_at = p;
    }
    if (e > 1e-3) ++failures;
  }
  return {failures == 0,
          fmt("points=20 h=1e-4 max_rel_err=%.3e at P1=%.4f tol=1e-3 failures=%d", worst, worst_at, failures)};
}

Outcome convergence_trends() {
  const auto t0 = Clock::now();
  std::vector<std::uint64_t> seeds(20);
  std::iota(seeds.begin(), seeds.end(), 1);
  const ComparisonTable table = comparison_experiment(reference(), {100, 1000}, seeds, 0.0);
  std::map<int, std::vector<double>> gap, jt;
  for (const auto& r : table.optima) {
    gap[r.N].push_back(std::abs(r.J_N_opt - r.J_tilde_star));
    jt[r.N].push_back(r.J_tilde_star);
  }
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double g100 = mean(gap[100]), g1000 = mean(gap[1000]);
  const double s100 = sample_std(jt[100]), s1000 = sample_std(jt[1000]);
  const double secs = seconds_since(t0);
  return {g1000 < g100 && s1000 < s100 && secs < 1800.0,
          fmt("mean_gap N=100: %.6g N=1000: %.6g; std_J_tilde N=100: %.6g N=1000: %.6g; runtime=%.1fs", g100,
              g1000, s100, s1000, secs)};
}

Outcome coefficient_oracles() {
  std::vector<std::string> bad;
  double worst_psi = 0.0, worst_aff = 0.0, worst_quad = 0.0, worst_chi = 0.0;

  // psi against the coupled ODE, N = 5, D = 3, 20 random (t, j).
  std::mt19937_64 rng(20235);
  const auto s = random_spec(rng, 2, 3);
  const double dt = 1e-3;
  const auto fc = solve_finite_coeffs(s, 5, dt);
  const Vector P = vec({0.2, 0.4, 0.4});
  const auto psi = coupled_psi(s, P, 5, dt);
  std::uniform_int_distribution<std::size_t> node(0, psi.size() - 1);
  std::uniform_int_distribution<int> dest(0, 2);
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = node(rng);
    const int j = dest(rng);
    const Vector mine = assemble_psi(fc, P, j, fc.phi1.time(i));
    worst_psi = std::max(worst_psi, (mine - psi[i].col(j)).norm() / std::max(1.0, mine.norm()));
  }
  if (worst_psi > 1e-8) bad.push_back("psi");

  // Affinity in P.
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto random_P = [&](int D) { return project_simplex(Vector::NullaryExpr(D, [&] { return U(rng); })).values(); };
  const auto lc = solve_limit_coeffs(s, dt);
  for (int k = 0; k < 20; ++k) {
    const Vector A = random_P(3), B = random_P(3);
    const double th = U(rng), t = U(rng) * s.T;
    for (const CoeffSet* c : {static_cast<const CoeffSet*>(&fc), static_cast<const CoeffSet*>(&lc)})
      for (int j = 0; j < 3; ++j) {
        const Vector lhs = assemble_psi(*c, th * A + (1 - th) * B, j, t);
        const Vector rhs = th * assemble_psi(*c, A, j, t) + (1 - th) * assemble_psi(*c, B, j, t);
        worst_aff = std::max(worst_aff, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
      }
  }
  if (worst_aff > 1e-8) bad.push_back("affinity");

  // chi is quadratic along segments.
  for (int k = 0; k < 20; ++k) {
    const Vector A = random_P(3), B = random_P(3);
    for (const CoeffSet* c : {static_cast<const CoeffSet*>(&fc), static_cast<const CoeffSet*>(&lc)}) {
      auto f = [&](double th) { return chi_at_zero(*c, th * A + (1 - th) * B); };
      const double f0 = f(0), fh = f(0.5), f1 = f(1);
      // Quadratic through 0, 1/2, 1 evaluated at 1/4 and 3/4.
      auto q = [&](double th) {
        return f0 * 2 * (th - 0.5) * (th - 1) - fh * 4 * th * (th - 1) + f1 * 2 * th * (th - 0.5);
      };
      for (double th : {0.25, 0.75})
        worst_quad = std::max(worst_quad, std::abs(f(th) - q(th)) / std::max(1.0, std::abs(f(th))));
    }
  }
  if (worst_quad > 1e-9) bad.push_back("chi-quadratic");

  // chi against direct integration of the full population system, N = 4, D = 2, n = 1.
  {
    std::mt19937_64 r2(20236);
    const auto s1 = random_spec(r2, 1, 2);
    const double fine = 2e-5;  // chi is a trapezoid integral, second order in dt
    const auto c4 = solve_finite_coeffs(s1, 4, fine);
    const Matrix X0 = sample_initial_states(s1.dist, 4, 7);
    for (const auto& lambda : std::vector<std::vector<int>>{{0, 0, 0, 0}, {0, 1, 1, 0}, {1, 1, 1, 0}}) {
      Vector Pl = Vector::Zero(2);
      for (int l : lambda) Pl[l] += 0.25;
      const auto full = full_system_oracle(s1, 4, lambda, X0, fine);
      worst_chi = std::max(worst_chi, rel_err(chi_at_zero(c4, Pl), full.chi0));
    }
  }
  if (worst_chi > 1e-8) bad.push_back("chi-ode");

  std::string which;
  for (const auto& b : bad) which += (which.empty() ? "" : ",") + b;
  return {bad.empty(), fmt("psi=%.3e affinity=%.3e chi_quadratic=%.3e chi_ode=%.3e tol=1e-8 (quadratic 1e-9)%s%s",
                           worst_psi, worst_aff, worst_quad, worst_chi, bad.empty() ? "" : " failed=",
                           which.c_str())};
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  RunConfig cfg;
  cfg.spec = reference();
  cfg.solver.P0 = vec({0.5, 0.5});
  cfg.solver.N = 20;
  cfg.solver.N_list = {10, 20};
  cfg.solver.seeds = 3;
  cfg.solver.P_grid_step = 0.25;
  const auto root = std::filesystem::temp_directory_path() / "cct_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<std::string> differ;
  long files = 0;
  for (const auto& cmd : commands()) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      RunOptions o;
      o.out_dir = root / (cmd + std::to_string(rep));
      o.seed = 42;
      run(cmd, cfg, o);
      const auto tree = read_tree(o.out_dir);
      if (rep == 0)
        first = tree;
      else if (tree != first)
        differ.push_back(cmd);
      files += static_cast<long>(tree.size());
    }
  }
  std::filesystem::remove_all(root);
  std::string which;
  for (const auto& d : differ) which += " " + d;
  return {differ.empty(), fmt("commands=%zu files_compared=%ld differing:%s", commands().size(), files / 2,
                              differ.empty() ? " none" : which.c_str())};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"escape time", escape_criterion},
      {"continuum optimum", continuum_optimum},
      {"oracle equivalence", oracle_equivalence},
      {"Bellman consistency", bellman_consistency},
      {"OT integrality", ot_integrality},
      {"convexity", convexity_suite},
      {"subgradient check", subgradient_check},
      {"convergence trends", convergence_trends},
      {"coefficient oracles", coefficient_oracles},
      {"determinism", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks; one PASS/FAIL line per criterion"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  const auto& list = criteria();
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (only != 0 && static_cast<int>(k) + 1 != only) continue;
    Outcome o;
    try {
      o = list[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, list[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
