#include "cct/coeffs.hpp"
#include "cct/continuum.hpp"
#include "cct/errors.hpp"
#include "cct/finite.hpp"
#include "cct/sim.hpp"
#include "cct/transport.hpp"

#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cct;
using cct::testing::reference_spec;
using cct::testing::random_spec;
using cct::testing::scalar_spec;
using cct::testing::vec;

TEST(Simulate, FrozenWithoutDriftOrActuation) {
  auto s = reference_spec();
  s.A.setZero();
  s.B.setZero();
  const auto fc = solve_finite_coeffs(s, 4, 1e-2);
  const Matrix X0 = sample_initial_states(s.dist, 4, 3);
  const auto b = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(vec({0.5, 0.5})), {0, 1, 1, 0}});
  for (const auto& X : b.states) EXPECT_EQ(X, X0);
  for (const auto& U : b.controls) EXPECT_EQ(U.norm(), 0.0);
}

TEST(Simulate, ScalarTrackingCost) {
  // a = 0, b = 1, r_u = 1, no congestion or stress: V = m (x0 - d)^2 / (2 (1 + m T)).
  const double m = 2.0, T = 1.0, d = 1.0, x0 = -0.7;
  const auto s = scalar_spec(0, 1, 0, 0, 1, m, {d}, T);
  const auto fc = solve_finite_coeffs(s, 1, 1e-3);
  const Matrix X0 = Matrix::Constant(1, 1, x0);
  const auto b = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(vec({1.0})), {0}});
  EXPECT_NEAR(b.realized_cost, 0.5 * m * (x0 - d) * (x0 - d) / (1 + m * T), 1e-6);
  EXPECT_NEAR(b.states.back()(0, 0), d + (x0 - d) / (1 + m * T), 1e-6);
}

TEST(Simulate, FiniteStrategyRealizesItsValue) {
  std::mt19937_64 rng(301);
  for (int N : {2, 5, 12}) {
    const auto s = random_spec(rng, 2, 3);
    const auto fc = solve_finite_coeffs(s, N, 1e-3);
    const Matrix X0 = sample_initial_states(s.dist, N, 40 + N);
    const auto sol = solve_finite(s, fc, X0);
    const auto b = simulate(s, X0, make_strategy(sol, fc));
    EXPECT_NEAR(b.realized_cost, sol.J_opt, 1e-4 * std::max(1.0, std::abs(sol.J_opt))) << "N=" << N;
  }
}

TEST(Simulate, RecordedCostMatchesBundleCost) {
  std::mt19937_64 rng(303);
  const auto s = random_spec(rng, 2, 2);
  const auto fc = solve_finite_coeffs(s, 6, 1e-2);
  const Matrix X0 = sample_initial_states(s.dist, 6, 9);
  const auto b = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(vec({0.5, 0.5})), {0, 1, 0, 1, 0, 1}});
  EXPECT_NEAR(realized_social_cost(s, b), b.realized_cost, 1e-12 * std::abs(b.realized_cost));
  for (std::size_t k = 0; k < b.times.size(); ++k)
    EXPECT_LT((b.mean_path[k] - b.states[k].rowwise().mean()).norm(), 1e-12);

  SimOptions o;
  o.record = false;
  const auto lean = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(vec({0.5, 0.5})), {0, 1, 0, 1, 0, 1}}, o);
  EXPECT_EQ(lean.states.size(), 1u);
  EXPECT_EQ(lean.states.front(), b.states.back());
  EXPECT_EQ(lean.realized_cost, b.realized_cost);
  EXPECT_THROW(realized_social_cost(s, lean), std::invalid_argument);
}

TEST(Simulate, FiniteMeanFollowsMeanOde) {
  std::mt19937_64 rng(305);
  const auto s = random_spec(rng, 2, 2);
  const int N = 8;
  const auto fc = solve_finite_coeffs(s, N, 1e-3);
  const Matrix X0 = sample_initial_states(s.dist, N, 17);
  const std::vector<int> lambda{0, 0, 1, 0, 1, 1, 1, 1};
  const Vector P = vec({3.0 / 8, 5.0 / 8});
  const auto b = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(P), lambda});
  const auto m = finite_mean_ode(fc, P, X0.rowwise().mean());
  ASSERT_EQ(m.size(), b.mean_path.size());
  for (std::size_t k = 0; k < m.size(); ++k)
    EXPECT_LT((b.mean_path[k] - m.node(k)).norm(), 1e-6 * std::max(1.0, m.node(k).norm()));
}

TEST(Simulate, ContinuumMeanFollowsMeanField) {
  // Two mirrored agents split evenly: the empirical mean and occupancy equal
  // the limit ones, so the empirical mean must track the mean-field path.
  const auto s = reference_spec();
  const auto lc = solve_limit_coeffs(s, default_step(s.T));
  ASSERT_LT(lc.mean0.norm(), 1e-12);
  const Matrix& sites = lc.beta.front();
  const Vector g = Vector::Zero(2);
  const Vector x = 0.2 * (sites.col(0) - sites.col(1));
  ASSERT_EQ(assign_destination(sites, g, x), 0);
  ASSERT_EQ(assign_destination(sites, g, -x), 1);
  Matrix X0(2, 2);
  X0.col(0) = x;
  X0.col(1) = -x;
  const Vector P = vec({0.5, 0.5});
  const auto b = simulate(s, X0, ContinuumStrategy{&lc, SimplexVector(P), g});
  EXPECT_EQ(b.assignments, (std::vector<int>{0, 1}));
  const auto m = mean_field_ode(lc, P);
  ASSERT_EQ(m.size(), b.mean_path.size());
  for (std::size_t k = 0; k < m.size(); ++k)
    EXPECT_LT((b.mean_path[k] - m.node(k)).norm(), 1e-6 * std::max(1.0, m.node(k).norm()));
}

TEST(Simulate, Deterministic) {
  const auto s = reference_spec();
  const auto lc = solve_limit_coeffs(s, default_step(s.T));
  const Matrix X0 = sample_initial_states(s.dist, 50, 7);
  const ContinuumStrategy strat{&lc, SimplexVector(vec({0.55, 0.45})), vec({100.0, -100.0})};
  const auto a = simulate(s, X0, strat);
  const auto b = simulate(s, X0, strat);
  EXPECT_EQ(a.realized_cost, b.realized_cost);
  EXPECT_EQ(a.states.back(), b.states.back());
  EXPECT_EQ(a.assignments, b.assignments);
}

TEST(Simulate, AgentsReachTheirDestinations) {
  const auto s = reference_spec();
  const auto lc = solve_limit_coeffs(s, default_step(s.T));
  const auto sol = solve_continuum(s, lc);
  const int N = 1000;
  const Matrix X0 = sample_initial_states(s.dist, N, 11);
  const auto b = simulate(s, X0, make_strategy(sol, lc));
  double before = 0.0, after = 0.0;
  for (int i = 0; i < N; ++i) {
    const Vector& d = s.destinations[b.assignments[i]];
    before += (X0.col(i) - d).norm() / N;
    after += (b.states.back().col(i) - d).norm() / N;
  }
  EXPECT_LT(after, 0.1 * before);
}

TEST(Simulate, HorizonAndShapeChecks) {
  const auto s = reference_spec();
  const auto fc = solve_finite_coeffs(s, 3, 1e-2);
  const Matrix X0 = sample_initial_states(s.dist, 3, 1);
  const FiniteStrategy ok{&fc, SimplexVector(vec({1.0 / 3, 2.0 / 3})), {0, 1, 1}};
  EXPECT_THROW(simulate(s, sample_initial_states(s.dist, 4, 1), ok), std::invalid_argument);
  EXPECT_THROW(simulate(s, X0, FiniteStrategy{&fc, ok.P, {0, 1}}), std::invalid_argument);
  EXPECT_THROW(simulate(s, X0, FiniteStrategy{nullptr, ok.P, ok.lambda}), std::invalid_argument);
  EXPECT_THROW(simulate(reference_spec(30.0), X0, ok), HorizonInfeasible);
}

TEST(Occupancy, CountsPowerCells) {
  const Matrix sites = (Matrix(2, 2) << 0, 1, 0, 0).finished();
  Matrix X(2, 5);
  X << 0.1, 0.4, 0.6, 0.9, 2.0,
       0.0, 0.0, 0.0, 0.0, 0.0;
  EXPECT_EQ(occupancy(X, sites, Vector::Zero(2)).values(), vec({0.4, 0.6}));
  // Raising g_1 by 2 * 0.5 moves the boundary from 0.5 to 0.0.
  EXPECT_EQ(occupancy(X, sites, vec({0.0, 1.0})).values(), vec({0.0, 1.0}));
  EXPECT_THROW(occupancy(Matrix(2, 0), sites, Vector::Zero(2)), std::invalid_argument);
}

TEST(SampleStd, Basic) {
  EXPECT_EQ(sample_std({}), 0.0);
  EXPECT_EQ(sample_std({3.0}), 0.0);
  EXPECT_DOUBLE_EQ(sample_std({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0));
}

TEST(Comparison, ContinuumStrategyIsFeasibleForFiniteProblem) {
  const auto s = reference_spec();
  const auto table = comparison_experiment(s, {10, 20}, {1, 2}, 0.25);
  EXPECT_EQ(table.optima.size(), 4u);
  EXPECT_EQ(table.rows.size(), 2u * 2u * 5u);
  for (const auto& o : table.optima) {
    EXPECT_LE(o.J_N_opt, o.J_tilde_star * (1 + 1e-6));
    EXPECT_NEAR(o.F_star.sum(), 1.0, 1e-12);
  }
  for (const auto& r : table.rows) {
    const OptimumRow* opt = nullptr;
    for (const auto& o : table.optima)
      if (o.N == r.N && o.seed == r.seed) opt = &o;
    ASSERT_NE(opt, nullptr);
    EXPECT_GE(r.J_N, opt->J_N_opt);
    EXPECT_GE(r.J_tilde, opt->J_N_opt * (1 - 1e-6));
    EXPECT_NEAR(r.P_N[0] * r.N, std::round(r.P_N[0] * r.N), 1e-9);
  }
  const auto plot = aggregate(table);
  ASSERT_EQ(plot.size(), 10u);
  for (std::size_t k = 1; k < plot.size(); ++k)
    EXPECT_TRUE(plot[k - 1].N < plot[k].N || (plot[k - 1].N == plot[k].N && plot[k - 1].P1 < plot[k].P1));
}
