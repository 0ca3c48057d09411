#pragma once

#include "cct/coeffs.hpp"
#include "cct/model.hpp"
#include "cct/transport.hpp"

#include <utility>
#include <vector>

namespace cct {

inline constexpr double kDefaultEnumerationCap = 2e5;

/// Number of points of the rational simplex grid, C(N + D - 1, D - 1).
double fraction_count(int N, int D);

/// All compositions of N into D parts divided by N, lexicographic order
/// (first coordinate descending). Throws CapExceeded.
std::vector<SimplexVector> enumerate_fractions(int N, int D, double cap = kDefaultEnumerationCap);

struct FiniteCost {
  double J = 0.0;
  TransportPlan plan;
};

/// J^N(P) for the initial states X0 (n x N).
FiniteCost finite_cost(const ProblemSpec& spec, const FiniteCoeffs& fc, const Matrix& X0,
                       const Vector& P);

struct FiniteSolution {
  SimplexVector P_opt;
  std::vector<int> lambda;  // zero-based destinations
  double J_opt = 0.0;
  std::vector<std::pair<SimplexVector, double>> cost_table;
};

struct FiniteOptions {
  double dt = 0.0;  // 0 -> default_step(T)
  double cap = kDefaultEnumerationCap;
  bool override_horizon = false;
  OtOptions ot;
};

/// Exhaustive minimization over the rational simplex grid.
FiniteSolution solve_finite(const ProblemSpec& spec, const Matrix& X0, const FiniteOptions& opts = {});

/// Same, reusing already integrated coefficients.
FiniteSolution solve_finite(const ProblemSpec& spec, const FiniteCoeffs& fc, const Matrix& X0,
                            double cap = kDefaultEnumerationCap, const OtOptions& ot = {});

/// u = -R_u^{-1} B^T [(phi1 - phi2 / N) x + phi2 xbar + psi_j(t, P)].
Vector finite_control(const FiniteCoeffs& fc, const Vector& P, int j, const Vector& x,
                      const Vector& xbar, double t);

/// Forward RK4 of the population mean on the coefficient grid.
TimeGrid<Vector> finite_mean_ode(const FiniteCoeffs& fc, const Vector& P, const Vector& xbar0);

}  // namespace cct
