#pragma once

#include "cct/coeffs.hpp"
#include "cct/model.hpp"
#include "cct/transport.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace cct {

struct LimitCost {
  double J = 0.0;
  double C = 0.0;  // semi-discrete transport value C(P)
  PowerWeights weights;
  long inner_iterations = 0;
};

/// J(P) for the limit system; the transport term is solved with `inner`.
LimitCost limit_cost(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                     const SemidiscreteOptions& inner = {});

/// J(P) with C(P) supplied by the caller.
double limit_cost_given_transport(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                                  double C);

/// kappa g* - 1/2 (W_int + W_int^T) P + H.
Vector subgradient(const ProblemSpec& spec, const LimitCoeffs& lc, const Vector& P,
                   const Vector& g_star, double kappa = 0.5);

struct ContinuumParams {
  std::optional<Vector> P0;  // default: uniform
  std::optional<Vector> g0;  // default: zeros
  double s_in = 3500.0;
  double delta = 5e-5;
  long max_inner = 100000;
  int max_outer = 500;
  double kappa = 0.5;
  double level_init = 0.01;   // delta_lev as a fraction of |J(P0)|
  double level_relax = 1.5;   // step relaxation, in (0, 2)
  double level_grow = 1.5;    // applied on sufficient descent
  double level_shrink = 0.5;  // applied otherwise
  double level_min_rel = 1e-9;
  QuadratureOptions quadrature;
};

struct ContinuumSolution {
  SimplexVector P_star;
  PowerWeights g_star;
  double J_star = 0.0;
  std::vector<std::pair<SimplexVector, double>> iterates;
  int outer_iterations = 0;
};

/// Projected subgradient outer loop with a dynamic level step and the
/// semi-discrete inner loop. Throws MaxOuterExceeded.
ContinuumSolution solve_continuum(const ProblemSpec& spec, const LimitCoeffs& lc,
                                  const ContinuumParams& params = {});

/// u = -R_u^{-1} B^T [phi1 x + phi2 xbar + psi_j(t, P)].
Vector continuum_control(const LimitCoeffs& lc, const Vector& P, int j, const Vector& x, double t,
                         const Vector& xbar_t);

/// Forward RK4 of the limit mean from the distribution mean.
TimeGrid<Vector> mean_field_ode(const LimitCoeffs& lc, const Vector& P);

}  // namespace cct
