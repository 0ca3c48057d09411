#pragma once

#include "cct/model.hpp"
#include "cct/time_grid.hpp"

#include <vector>

namespace cct {

inline constexpr double kBlowUpThreshold = 1e12;

/// Sampled solution of a backward coefficient system: the Riccati blocks,
/// the affine-in-P pieces (alpha, beta) of psi, the quadratic chi kernel W and
/// the integrated quantities used by the cost and its subgradient.
struct CoeffSet {
  double T = 0.0;
  int n = 0;
  int D = 0;
  Matrix S;     // B R_u^{-1} B^T
  Matrix gain;  // R_u^{-1} B^T, so u = -gain * (...)
  Matrix A;
  Matrix dest;  // n x D

  TimeGrid<Matrix> phi1;   // n x n
  TimeGrid<Matrix> phi2;   // n x n
  TimeGrid<Matrix> alpha;  // n x D, last column identically zero
  TimeGrid<Matrix> beta;   // n x D
  TimeGrid<Matrix> W;      // D x D

  Matrix W_int;        // 2 * int_0^T W dt
  Vector beta_sq_int;  // int_0^T ([beta_j]_S^2 - [d_j]_{R_d}^2) dt
  Vector chi_T;        // chi(T, e_j) = 1/2 [d_j]_M^2
  Vector H;            // subgradient offset, evaluated at the distribution mean
  Vector mean0;        // E[x(0)] under the spec's distribution

  double max_asymmetry = 0.0;  // largest |phi - phi^T| seen before per-step symmetrization
};

struct LimitCoeffs : CoeffSet {};

struct FiniteCoeffs : CoeffSet {
  int N = 0;
};

/// Default coefficient step: T / 2000.
inline double default_step(double T) { return T / 2000.0; }

LimitCoeffs solve_limit_coeffs(const ProblemSpec& spec, double dt);
FiniteCoeffs solve_finite_coeffs(const ProblemSpec& spec, int N, double dt);

/// psi_j(t, P) = alpha(t) P - beta_j(t), j zero-based.
Vector assemble_psi(const CoeffSet& c, const Vector& P, int j, double t);

/// chi(0, P) by trapezoid quadrature of the chi ODE right-hand side.
double chi_at_zero(const CoeffSet& c, const Vector& P);

struct FullSystemValue {
  double cost = 0.0;  // V^N(0, lambda)
  Matrix phi0;        // Nn x Nn Riccati solution at t = 0
  Vector Psi0;        // Nn
  double chi0 = 0.0;
};

/// Integrates the undecomposed Nn-dimensional Riccati, Psi and chi systems
/// for a fixed assignment. Test oracle only: requires N * n <= 12.
/// lambda holds zero-based destination indices, X0 is n x N.
FullSystemValue full_system_oracle(const ProblemSpec& spec, int N, const std::vector<int>& lambda,
                                   const Matrix& X0, double dt);

}  // namespace cct
