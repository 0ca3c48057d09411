#include "cct/sim.hpp"

#include "cct/errors.hpp"
#include "cct/escape.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace cct {

FiniteStrategy make_strategy(const FiniteSolution& sol, const FiniteCoeffs& fc) {
  return {&fc, sol.P_opt, sol.lambda};
}

ContinuumStrategy make_strategy(const ContinuumSolution& sol, const LimitCoeffs& lc) {
  return {&lc, sol.P_star, sol.g_star.g};
}

namespace {

Matrix gather_columns(const Matrix& src, const std::vector<int>& idx) {
  Matrix out(src.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = src.col(idx[i]);
  return out;
}

double running_cost(const ProblemSpec& spec, const Matrix& X, const Matrix& U, const Matrix& dest) {
  const double N = static_cast<double>(X.cols());
  const Vector xbar = X.rowwise().mean();
  const Matrix dx = X.colwise() - xbar;
  const Matrix dd = X - dest;
  const double congestion = (dx.array() * (spec.R_x * dx).array()).sum();
  const double stress = (dd.array() * (spec.R_d * dd).array()).sum();
  const double effort = (U.array() * (spec.R_u * U).array()).sum();
  return 0.5 * (-congestion + stress + effort) / N;
}

double terminal_cost(const ProblemSpec& spec, const Matrix& X, const Matrix& dest) {
  const Matrix dd = X - dest;
  return 0.5 * (dd.array() * (spec.M * dd).array()).sum() / static_cast<double>(X.cols());
}

// Interpolated coefficients at one time for a fixed P.
struct Frame {
  Matrix phi1, phi2;
  Matrix psi;  // n x D, column j is psi_j(t, P)
  Vector psi_bar;
};

Frame frame_at(const CoeffSet& c, const Vector& P, double t) {
  Frame f;
  f.phi1 = c.phi1.at(t);
  f.phi2 = c.phi2.at(t);
  const Matrix beta = c.beta.at(t);
  const Vector aP = c.alpha.at(t) * P;
  f.psi = (-beta).colwise() + aP;
  f.psi_bar = aP - beta * P;
  return f;
}

}  // namespace

TrajectoryBundle simulate(const ProblemSpec& spec, const Matrix& X0, const Strategy& strategy,
                          const SimOptions& opts) {
  require_valid(spec);
  if (opts.check_horizon) assert_horizon(spec, opts.override_horizon);
  const int N = static_cast<int>(X0.cols());
  if (N < 1 || X0.rows() != spec.n) throw std::invalid_argument("simulate: X0 must be n x N");

  const bool finite = std::holds_alternative<FiniteStrategy>(strategy);
  const CoeffSet* c = finite ? static_cast<const CoeffSet*>(std::get<FiniteStrategy>(strategy).coeffs)
                             : static_cast<const CoeffSet*>(std::get<ContinuumStrategy>(strategy).coeffs);
  if (c == nullptr) throw std::invalid_argument("simulate: strategy without coefficients");
  if (std::abs(c->T - spec.T) > 1e-12 * std::max(1.0, spec.T))
    throw std::invalid_argument("simulate: coefficient grid does not cover [0, T]");

  TrajectoryBundle b;
  Vector P;
  if (finite) {
    const auto& s = std::get<FiniteStrategy>(strategy);
    if (s.coeffs->N != N) throw std::invalid_argument("simulate: finite coefficients built for another N");
    if (static_cast<int>(s.lambda.size()) != N) throw std::invalid_argument("simulate: lambda size");
    P = s.P.values();
    b.assignments = s.lambda;
  } else {
    const auto& s = std::get<ContinuumStrategy>(strategy);
    P = s.P.values();
    const Matrix& sites = c->beta.front();
    b.assignments.resize(N);
    for (int i = 0; i < N; ++i) b.assignments[i] = assign_destination(sites, s.g, X0.col(i));
  }
  const Matrix dest = gather_columns(c->dest, b.assignments);
  const double invN = 1.0 / N;
  const double own_scale = finite ? invN : 0.0;

  // Control and state derivative; m is the deterministic limit mean used by
  // the continuum strategy (ignored by the finite one, which couples through
  // the empirical mean).
  auto control = [&](const Frame& f, const Matrix& X, const Vector& m) -> Matrix {
    const Vector coupling = finite ? Vector(f.phi2 * (X.rowwise().mean())) : Vector(f.phi2 * m);
    Matrix p = (f.phi1 - own_scale * f.phi2) * X + gather_columns(f.psi, b.assignments);
    p.colwise() += coupling;
    return -c->gain * p;
  };
  auto mean_rate = [&](const Frame& f, const Vector& m) -> Vector {
    return (c->A - c->S * (f.phi1 + f.phi2)) * m - c->S * f.psi_bar;
  };

  const double dt = opts.dt_fwd > 0.0 ? opts.dt_fwd : c->phi1.step();
  const int K = step_count(spec.T, dt);
  const double h = spec.T / K;

  Matrix X = X0;
  Vector m = finite ? Vector::Zero(spec.n) : c->mean0;
  double cost = 0.0;
  Frame f0 = frame_at(*c, P, 0.0);
  Matrix U = control(f0, X, m);
  auto record = [&](double t) {
    b.times.push_back(t);
    b.mean_path.push_back(X.rowwise().mean());
    if (opts.record) {
      b.states.push_back(X);
      b.controls.push_back(U);
    }
  };
  record(0.0);
  cost += 0.5 * h * running_cost(spec, X, U, dest);

  for (int k = 0; k < K; ++k) {
    const double t = h * k;
    const double t_next = k + 1 == K ? spec.T : h * (k + 1);
    const Frame fm = frame_at(*c, P, t + 0.5 * h);
    const Frame f1 = frame_at(*c, P, t_next);

    const Matrix k1 = spec.A * X + spec.B * U;
    const Vector l1 = finite ? Vector() : mean_rate(f0, m);
    const Matrix X2 = X + 0.5 * h * k1;
    const Vector m2 = finite ? m : Vector(m + 0.5 * h * l1);
    const Matrix k2 = spec.A * X2 + spec.B * control(fm, X2, m2);
    const Vector l2 = finite ? Vector() : mean_rate(fm, m2);
    const Matrix X3 = X + 0.5 * h * k2;
    const Vector m3 = finite ? m : Vector(m + 0.5 * h * l2);
    const Matrix k3 = spec.A * X3 + spec.B * control(fm, X3, m3);
    const Vector l3 = finite ? Vector() : mean_rate(fm, m3);
    const Matrix X4 = X + h * k3;
    const Vector m4 = finite ? m : Vector(m + h * l3);
    const Matrix k4 = spec.A * X4 + spec.B * control(f1, X4, m4);
    const Vector l4 = finite ? Vector() : mean_rate(f1, m4);

    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite) m += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    U = control(f1, X, m);
    f0 = f1;
    record(t_next);
    cost += (k + 1 == K ? 0.5 : 1.0) * h * running_cost(spec, X, U, dest);
  }
  cost += terminal_cost(spec, X, dest);
  b.realized_cost = cost;
  if (!opts.record) {
    b.states.push_back(X);
    b.controls.push_back(U);
  }
  return b;
}

double realized_social_cost(const ProblemSpec& spec, const TrajectoryBundle& b) {
  if (b.states.size() != b.times.size() || b.controls.size() != b.times.size() || b.times.size() < 2)
    throw std::invalid_argument("realized_social_cost: bundle was not recorded at every node");
  Matrix dest(spec.n, static_cast<Eigen::Index>(b.assignments.size()));
  for (std::size_t i = 0; i < b.assignments.size(); ++i)
    dest.col(static_cast<Eigen::Index>(i)) = spec.destinations[b.assignments[i]];
  double cost = 0.0;
  const std::size_t K = b.times.size() - 1;
  for (std::size_t k = 0; k <= K; ++k) {
    double w = 0.0;
    if (k > 0) w += 0.5 * (b.times[k] - b.times[k - 1]);
    if (k < K) w += 0.5 * (b.times[k + 1] - b.times[k]);
    cost += w * running_cost(spec, b.states[k], b.controls[k], dest);
  }
  return cost + terminal_cost(spec, b.states.back(), dest);
}

SimplexVector occupancy(const Matrix& X0, const Matrix& sites, const Vector& g) {
  const Eigen::Index N = X0.cols();
  if (N < 1) throw std::invalid_argument("occupancy: no agents");
  Vector counts = Vector::Zero(sites.cols());
  for (Eigen::Index i = 0; i < N; ++i) counts[assign_destination(sites, g, X0.col(i))] += 1.0;
  return SimplexVector(counts / static_cast<double>(N));
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

ComparisonTable comparison_experiment(const ProblemSpec& spec, const std::vector<int>& N_list,
                                      const std::vector<std::uint64_t>& seeds, double P_grid_step,
                                      const ComparisonOptions& opts) {
  assert_horizon(spec, opts.override_horizon);
  const double dt = opts.dt > 0.0 ? opts.dt : default_step(spec.T);
  const LimitCoeffs lc = solve_limit_coeffs(spec, dt);
  const Matrix& sites = lc.beta.front();

  ComparisonTable table;
  const ContinuumSolution cs = solve_continuum(spec, lc, opts.continuum);
  table.P_star = cs.P_star.values();
  table.J_star = cs.J_star;

  SemidiscreteOptions inner;
  inner.s_in = opts.continuum.s_in;
  inner.delta = opts.continuum.delta;
  inner.max_iter = opts.continuum.max_inner;
  inner.quadrature = opts.continuum.quadrature;

  // Continuum strategy at every sweep point; independent of N and the seed.
  struct SweepPoint {
    Vector P;
    Vector g;
    double J;
  };
  std::vector<SweepPoint> sweep;
  if (spec.D() == 2 && P_grid_step > 0.0) {
    const int steps = static_cast<int>(std::lround(1.0 / P_grid_step));
    Vector g = Vector::Zero(2);
    for (int s = 0; s <= steps; ++s) {
      Vector P(2);
      P[0] = std::min(1.0, s * P_grid_step);
      P[1] = 1.0 - P[0];
      inner.g0 = g;
      const LimitCost lcost = limit_cost(spec, lc, P, inner);
      g = lcost.weights.g;
      sweep.push_back({P, g, lcost.J});
    }
  }

  SimOptions sim_opts;
  sim_opts.record = false;
  sim_opts.check_horizon = false;

  for (int N : N_list) {
    const FiniteCoeffs fc = solve_finite_coeffs(spec, N, dt);
    for (std::uint64_t seed : seeds) {
      const Matrix X0 = sample_initial_states(spec.dist, N, seed);

      OptimumRow opt;
      opt.N = N;
      opt.seed = seed;
      const FiniteSolution fs = solve_finite(spec, fc, X0, opts.finite_cap);
      opt.P_opt = fs.P_opt.values();
      opt.J_N_opt = fs.J_opt;
      opt.F_star = occupancy(X0, sites, cs.g_star.g).values();
      opt.J_tilde_star = simulate(spec, X0, make_strategy(cs, lc), sim_opts).realized_cost;
      table.optima.push_back(std::move(opt));

      for (const auto& sp : sweep) {
        ComparisonRow row;
        row.N = N;
        row.seed = seed;
        row.P = sp.P;
        row.P_N.resize(2);
        row.P_N[0] = std::round(sp.P[0] * N) / N;
        row.P_N[1] = 1.0 - row.P_N[0];
        row.J = sp.J;
        row.J_N = finite_cost(spec, fc, X0, row.P_N).J;
        row.F = occupancy(X0, sites, sp.g).values();
        ContinuumStrategy strat{&lc, SimplexVector(sp.P), sp.g};
        row.J_tilde = simulate(spec, X0, strat, sim_opts).realized_cost;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

std::vector<PlotRow> aggregate(const ComparisonTable& table) {
  std::map<std::pair<int, double>, std::vector<const ComparisonRow*>> groups;
  for (const auto& r : table.rows) groups[{r.N, r.P[0]}].push_back(&r);
  std::vector<PlotRow> out;
  for (const auto& [key, rows] : groups) {
    std::vector<double> jn, jt, f;
    for (const auto* r : rows) {
      jn.push_back(r->J_N);
      jt.push_back(r->J_tilde);
      f.push_back(r->F[0]);
    }
    auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    PlotRow p;
    p.N = key.first;
    p.P1 = key.second;
    p.J = rows.front()->J;
    p.J_N_mean = mean(jn);
    p.J_N_std = sample_std(jn);
    p.J_tilde_mean = mean(jt);
    p.J_tilde_std = sample_std(jt);
    p.F_N_mean = mean(f);
    out.push_back(p);
  }
  return out;
}

}  // namespace cct
