#pragma once

#include "cct/model.hpp"

#include <optional>
#include <vector>

namespace cct {

/// Euclidean projection onto the probability simplex (sort-and-threshold).
SimplexVector project_simplex(const Vector& v);

/// g when |g| <= radius, otherwise g scaled back onto the sphere.
Vector project_ball(const Vector& g, double radius);

struct TransportPlan {
  Matrix gamma;  // N x D, rows sum to 1/N, columns to P_j
  double value = 0.0;
  std::optional<std::vector<int>> assignment;  // zero-based, present for integral plans
};

struct OtOptions {
  bool force_simplex = false;  // skip the sorted two-column shortcut
  double reduced_cost_eps = 1e-12;
};

/// Balanced transport between N agents of mass 1/N and D columns of mass P_j.
/// Throws InfeasibleMarginals when the column masses do not sum to one.
TransportPlan discrete_ot(const Matrix& costs, const Vector& col_marginals, const OtOptions& opts = {});
TransportPlan discrete_ot(const Matrix& costs, const SimplexVector& col_marginals,
                          const OtOptions& opts = {});

/// Squared-distance cost matrix |x_i - site_j|^2, N x D.
Matrix squared_distance_costs(const Matrix& X, const Matrix& sites);

struct QuadratureOptions {
  int nodes_per_axis = 0;  // 0 -> 2^20 (n=1), 1024 (n=2), 101 (n=3)
  int max_dimension = 3;
};

int default_nodes_per_axis(int n);

/// Per-cell mass and the integral of min_j(|x - site_j|^2 - g_j).
struct CellEvaluation {
  Vector measures;
  double integral = 0.0;
};

/// Power cells {x : j minimizes |x - site_j|^2 - g_j}, ties to the smallest j.
/// Uniform boxes use a midpoint tensor grid; empirical measures are exact.
CellEvaluation evaluate_cells(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                              const QuadratureOptions& q = {});

/// Node-by-node evaluation of the same quadrature; reference implementation.
CellEvaluation evaluate_cells_bruteforce(const InitialDistribution& dist, const Matrix& sites,
                                         const Vector& g, const QuadratureOptions& q = {});

Vector cell_measures(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                     const QuadratureOptions& q = {});

/// J^D(g, P) = int min_j(|x - site_j|^2 - g_j) dP0 + sum_j P_j g_j.
double dual_value(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                  const Vector& P, const QuadratureOptions& q = {});

/// sup over the support and the sites of |x - site_j|^2.
double dual_ball_radius(const InitialDistribution& dist, const Matrix& sites);

struct PowerWeights {
  Vector g;
  Vector measures;
};

struct SemidiscreteOptions {
  double s_in = 3500.0;
  double delta = 5e-5;
  long max_iter = 100000;
  std::optional<Vector> g0;
  QuadratureOptions quadrature;
};

struct SemidiscreteResult {
  PowerWeights weights;
  double C = 0.0;  // J^D(g*, P)
  long iterations = 0;
};

/// Projected supergradient ascent on the dual. Throws MaxIterExceeded.
SemidiscreteResult solve_semidiscrete(const InitialDistribution& dist, const Matrix& sites,
                                      const Vector& P, const SemidiscreteOptions& opts = {});

/// argmin_j |x - site_j|^2 - g_j, smallest index on ties.
int assign_destination(const Matrix& sites, const Vector& g, const Vector& x);

}  // namespace cct
