#include "cct/continuum.hpp"

#include "cct/errors.hpp"

#include <cmath>
#include <limits>

namespace cct {

double limit_cost_given_transport(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                                  double C) {
  if (P.size() != lc.D) throw std::invalid_argument("limit_cost: P has wrong size");
  const Matrix& phi1 = lc.phi1.front();
  const Matrix& phi2 = lc.phi2.front();
  const Moments mom = moments(spec.dist, phi1);
  const Vector& xbar = mom.mean;
  double beta_sq = 0.0;
  for (int j = 0; j < lc.D; ++j) beta_sq += P[j] * lc.beta.front().col(j).squaredNorm();
  return 0.5 * mom.quad + 0.5 * xbar.dot(phi2 * xbar) + 0.5 * C +
         (lc.alpha.front() * P).dot(xbar) - 0.5 * beta_sq - 0.5 * mom.second + chi_at_zero(lc, P);
}

LimitCost limit_cost(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                     const SemidiscreteOptions& inner) {
  const auto sd = solve_semidiscrete(spec.dist, lc.beta.front(), P, inner);
  LimitCost out;
  out.C = sd.C;
  out.weights = sd.weights;
  out.inner_iterations = sd.iterations;
  out.J = limit_cost_given_transport(spec, lc, P, sd.C);
  return out;
}

Vector subgradient(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                   const Vector& g_star, double kappa) {
  (void)spec;
  if (P.size() != lc.D || g_star.size() != lc.D)
    throw std::invalid_argument("subgradient: size mismatch");
  return kappa * g_star - 0.5 * (lc.W_int + lc.W_int.transpose()) * P + lc.H;
}

ContinuumSolution solve_continuum(const ProblemSpec& spec, const LimitCoeffs& lc,
                                  const ContinuumParams& params) {
  const int D = lc.D;
  if (!(params.level_relax > 0.0 && params.level_relax < 2.0))
    throw std::invalid_argument("solve_continuum: level_relax must lie in (0, 2)");
  Vector P = params.P0 ? project_simplex(*params.P0).values() : SimplexVector::uniform(D).values();
  if (P.size() != D) throw std::invalid_argument("solve_continuum: P0 has wrong size");

  SemidiscreteOptions inner;
  inner.s_in = params.s_in;
  inner.delta = params.delta;
  inner.max_iter = params.max_inner;
  inner.quadrature = params.quadrature;
  inner.g0 = params.g0 ? *params.g0 : Vector::Zero(D);

  LimitCost cur = limit_cost(spec, lc, P, inner);
  ContinuumSolution sol;
  sol.iterates.emplace_back(SimplexVector(P), cur.J);
  sol.P_star = SimplexVector(P);
  sol.g_star = cur.weights;
  sol.J_star = cur.J;

  const double scale = std::max(std::abs(cur.J), 1e-12);
  double level = params.level_init * scale;
  const double level_min = params.level_min_rel * std::max(scale, 1.0);

  for (int k = 1; k <= params.max_outer; ++k) {
    sol.outer_iterations = k;
    Vector d = subgradient(spec, lc, P, cur.weights.g, params.kappa);
    d.array() -= d.mean();  // tangent to the simplex
    const double dn2 = d.squaredNorm();
    if (!(dn2 > 0.0)) return sol;

    const double target = sol.J_star - level;
    const double step = params.level_relax * (cur.J - target) / dn2;
    const Vector P_new = project_simplex(P - step * d).values();

    inner.g0 = cur.weights.g;
    LimitCost next = limit_cost(spec, lc, P_new, inner);
    if (next.J <= target)
      level *= params.level_grow;
    else
      level = std::max(level * params.level_shrink, level_min);

    sol.iterates.emplace_back(SimplexVector(P_new), next.J);
    if (next.J < sol.J_star) {
      sol.J_star = next.J;
      sol.P_star = SimplexVector(P_new);
      sol.g_star = next.weights;
    }
    const double change = (P_new - P).cwiseAbs().maxCoeff();
    P = P_new;
    cur = std::move(next);
    if (change <= params.delta) return sol;
  }
  const Vector& best = sol.P_star.values();
  throw MaxOuterExceeded(std::vector<double>(best.data(), best.data() + D), sol.J_star);
}

Vector continuum_control(const LimitCoeffs& lc, const Vector& P, int j, const Vector& x, double t,
                         const Vector& xbar_t) {
  const Vector p = lc.phi1.at(t) * x + lc.phi2.at(t) * xbar_t + assemble_psi(lc, P, j, t);
  return -lc.gain * p;
}

TimeGrid<Vector> mean_field_ode(const LimitCoeffs& lc, const Vector& P) {
  if (P.size() != lc.D) throw std::invalid_argument("mean_field_ode: P has wrong size");
  const auto& S = lc.S;
  auto rhs = [&](double t, const Vector& m) -> Vector {
    const Matrix Acl = lc.A - S * (lc.phi1.at(t) + lc.phi2.at(t));
    return Acl * m - S * (lc.alpha.at(t) * P - lc.beta.at(t) * P);
  };
  const std::size_t K = lc.phi1.size() - 1;
  const double h = lc.phi1.step();
  std::vector<Vector> out(K + 1);
  out[0] = lc.mean0;
  for (std::size_t k = 0; k < K; ++k) {
    const double t = lc.phi1.time(k);
    const Vector& y = out[k];
    const Vector k1 = rhs(t, y);
    const Vector k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, y + h * k3);
    out[k + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return TimeGrid<Vector>(lc.T, std::move(out));
}

}  // namespace cct
