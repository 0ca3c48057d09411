#pragma once

#include "cct/coeffs.hpp"
#include "cct/continuum.hpp"
#include "cct/finite.hpp"
#include "cct/model.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace cct {

struct TrajectoryBundle {
  std::vector<double> times;
  std::vector<Matrix> states;    // per node, n x N
  std::vector<Matrix> controls;  // per node, m x N
  std::vector<Vector> mean_path; // per node, empirical mean of the states
  std::vector<int> assignments;  // zero-based
  double realized_cost = 0.0;
};

struct FiniteStrategy {
  const FiniteCoeffs* coeffs = nullptr;
  SimplexVector P;
  std::vector<int> lambda;
};

struct ContinuumStrategy {
  const LimitCoeffs* coeffs = nullptr;
  SimplexVector P;
  Vector g;  // power weights defining the assignment cells
};

using Strategy = std::variant<FiniteStrategy, ContinuumStrategy>;

FiniteStrategy make_strategy(const FiniteSolution& sol, const FiniteCoeffs& fc);
ContinuumStrategy make_strategy(const ContinuumSolution& sol, const LimitCoeffs& lc);

struct SimOptions {
  double dt_fwd = 0.0;       // 0 -> coefficient step
  bool record = true;        // keep states and controls at every node
  bool check_horizon = true;
  bool override_horizon = false;
};

/// Closed-loop RK4 simulation of the agents X0 (n x N) under a strategy.
TrajectoryBundle simulate(const ProblemSpec& spec, const Matrix& X0, const Strategy& strategy,
                          const SimOptions& opts = {});

/// Population-average cost of a recorded bundle, trapezoid in time.
double realized_social_cost(const ProblemSpec& spec, const TrajectoryBundle& bundle);

/// Fraction of the agents falling in each power cell.
SimplexVector occupancy(const Matrix& X0, const Matrix& sites, const Vector& g);

struct ComparisonRow {
  int N = 0;
  std::uint64_t seed = 0;
  Vector P;        // grid point
  Vector P_N;      // nearest point of the rational grid
  Vector F;        // realized occupancy of the continuum strategy
  double J = 0.0;  // limit cost
  double J_N = 0.0;
  double J_tilde = 0.0;
};

struct OptimumRow {
  int N = 0;
  std::uint64_t seed = 0;
  Vector P_opt;
  double J_N_opt = 0.0;
  Vector F_star;
  double J_tilde_star = 0.0;  // continuum strategy at P_star
};

struct ComparisonTable {
  Vector P_star;
  double J_star = 0.0;
  std::vector<ComparisonRow> rows;
  std::vector<OptimumRow> optima;
};

struct ComparisonOptions {
  double dt = 0.0;  // coefficient step, 0 -> default_step(T)
  ContinuumParams continuum;
  double finite_cap = kDefaultEnumerationCap;
  bool override_horizon = false;
};

/// Sweeps P over {0, step, ..., 1} (D = 2 only; step <= 0 disables the sweep)
/// and evaluates J, J^N and the realized cost of the continuum strategy for
/// every N and seed, plus the exact optimum and the continuum strategy at P_star.
ComparisonTable comparison_experiment(const ProblemSpec& spec, const std::vector<int>& N_list,
                                      const std::vector<std::uint64_t>& seeds, double P_grid_step,
                                      const ComparisonOptions& opts = {});

struct PlotRow {
  int N = 0;
  double P1 = 0.0;
  double J = 0.0;
  double J_N_mean = 0.0, J_N_std = 0.0;
  double J_tilde_mean = 0.0, J_tilde_std = 0.0;
  double F_N_mean = 0.0;
};

/// Seed averages of the sweep rows, ordered by (N, P1).
std::vector<PlotRow> aggregate(const ComparisonTable& table);

double sample_std(const std::vector<double>& v);

}  // namespace cct
