#include "cct/finite.hpp"

#include "cct/errors.hpp"
#include "cct/escape.hpp"

#include <cmath>

namespace cct {

double fraction_count(int N, int D) {
  if (N < 1 || D < 1) throw std::invalid_argument("fraction_count: N and D must be positive");
  // C(N + D - 1, D - 1) as a product of ratios; exact for the sizes that fit a cap.
  double c = 1.0;
  for (int k = 1; k < D; ++k) c = c * (N + k) / k;
  return std::round(c);
}

std::vector<SimplexVector> enumerate_fractions(int N, int D, double cap) {
  const double count = fraction_count(N, D);
  if (count > cap) throw CapExceeded(count, cap);
  std::vector<SimplexVector> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> parts(D, 0);
  // Recursive descent: coordinate k takes the remaining mass downwards.
  auto rec = [&](auto&& self, int k, int remaining) -> void {
    if (k == D - 1) {
      parts[k] = remaining;
      Vector p(D);
      for (int j = 0; j < D; ++j) p[j] = static_cast<double>(parts[j]) / N;
      out.emplace_back(p);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      parts[k] = v;
      self(self, k + 1, remaining - v);
    }
  };
  rec(rec, 0, N);
  return out;
}

FiniteCost finite_cost(const ProblemSpec& spec, const FiniteCoeffs& fc, const Matrix& X0,
                       const Vector& P) {
  const int N = fc.N;
  if (X0.cols() != N || X0.rows() != fc.n)
    throw std::invalid_argument("finite_cost: X0 must be n x N");
  if (P.size() != fc.D) throw std::invalid_argument("finite_cost: P has wrong size");
  const Matrix& phi1 = fc.phi1.front();
  const Matrix& phi2 = fc.phi2.front();
  const Matrix& alpha = fc.alpha.front();
  const Matrix& beta = fc.beta.front();
  const Vector xbar = X0.rowwise().mean();

  const Matrix own = phi1 - phi2 / static_cast<double>(N);
  double quad = 0.0, second = 0.0;
  for (int i = 0; i < N; ++i) {
    quad += X0.col(i).dot(own * X0.col(i));
    second += X0.col(i).squaredNorm();
  }
  FiniteCost out;
  out.plan = discrete_ot(squared_distance_costs(X0, beta), P);
  double beta_sq = 0.0;
  for (int j = 0; j < fc.D; ++j) beta_sq += P[j] * beta.col(j).squaredNorm();
  out.J = quad / (2.0 * N) + 0.5 * xbar.dot(phi2 * xbar) + 0.5 * out.plan.value +
          (alpha * P).dot(xbar) - 0.5 * beta_sq - second / (2.0 * N) + chi_at_zero(fc, P);
  (void)spec;
  return out;
}

FiniteSolution solve_finite(const ProblemSpec& spec, const FiniteCoeffs& fc, const Matrix& X0,
                            double cap, const OtOptions& ot) {
  const int N = fc.N;
  const auto grid = enumerate_fractions(N, fc.D, cap);
  const Matrix costs = squared_distance_costs(X0, fc.beta.front());
  const Vector xbar = X0.rowwise().mean();

  // Terms independent of P are shared by every table entry.
  const Matrix own = fc.phi1.front() - fc.phi2.front() / static_cast<double>(N);
  double quad = 0.0, second = 0.0;
  for (int i = 0; i < N; ++i) {
    quad += X0.col(i).dot(own * X0.col(i));
    second += X0.col(i).squaredNorm();
  }
  const double base = quad / (2.0 * N) + 0.5 * xbar.dot(fc.phi2.front() * xbar) - second / (2.0 * N);
  const Vector lin = fc.alpha.front().transpose() * xbar -
                     0.5 * fc.beta.front().colwise().squaredNorm().transpose();

  FiniteSolution sol;
  sol.cost_table.reserve(grid.size());
  std::optional<TransportPlan> best_plan;
  for (const auto& P : grid) {
    TransportPlan plan = discrete_ot(costs, P, ot);
    const double J = base + 0.5 * plan.value + lin.dot(P.values()) + chi_at_zero(fc, P.values());
    sol.cost_table.emplace_back(P, J);
    // Strict improvement keeps the lexicographically first minimizer.
    if (!best_plan || J < sol.J_opt) {
      sol.J_opt = J;
      sol.P_opt = P;
      best_plan = std::move(plan);
    }
  }
  sol.lambda = *best_plan->assignment;
  (void)spec;
  return sol;
}

FiniteSolution solve_finite(const ProblemSpec& spec, const Matrix& X0, const FiniteOptions& opts) {
  assert_horizon(spec, opts.override_horizon);
  const int N = static_cast<int>(X0.cols());
  const double count = fraction_count(N, spec.D());
  if (count > opts.cap) throw CapExceeded(count, opts.cap);
  const auto fc = solve_finite_coeffs(spec, N, opts.dt > 0.0 ? opts.dt : default_step(spec.T));
  return solve_finite(spec, fc, X0, opts.cap, opts.ot);
}

Vector finite_control(const FiniteCoeffs& fc, const Vector& P, int j, const Vector& x,
                      const Vector& xbar, double t) {
  const Matrix phi1 = fc.phi1.at(t);
  const Matrix phi2 = fc.phi2.at(t);
  const Vector p = (phi1 - phi2 / static_cast<double>(fc.N)) * x + phi2 * xbar +
                   assemble_psi(fc, P, j, t);
  return -fc.gain * p;
}

TimeGrid<Vector> finite_mean_ode(const FiniteCoeffs& fc, const Vector& P, const Vector& xbar0) {
  const double w = fc.N == 1 ? 0.0 : (fc.N - 1.0) / fc.N;
  const auto& S = fc.S;
  auto rhs = [&](double t, const Vector& m) -> Vector {
    const Matrix Acl = fc.A - S * (fc.phi1.at(t) + w * fc.phi2.at(t));
    // sum_j P_j psi_j = alpha P - beta P.
    const Vector psi_bar = fc.alpha.at(t) * P - fc.beta.at(t) * P;
    return Acl * m - S * psi_bar;
  };
  const std::size_t K = fc.phi1.size() - 1;
  const double h = fc.phi1.step();
  std::vector<Vector> out(K + 1);
  out[0] = xbar0;
  for (std::size_t k = 0; k < K; ++k) {
    const double t = fc.phi1.time(k);
    const Vector& y = out[k];
    const Vector k1 = rhs(t, y);
    const Vector k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, y + h * k3);
    out[k + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return TimeGrid<Vector>(fc.T, std::move(out));
}

}  // namespace cct
