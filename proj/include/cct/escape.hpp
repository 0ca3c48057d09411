#pragma once

#include "cct/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cct {

/// Escape time of the limit Riccati equation
///   d/dt phi = phi S phi - phi A - A^T phi - (R_d - R_x),  phi(T) = M
/// integrated backward, and the induced horizon certificate.
struct DeltaScan {
  std::vector<double> t;
  std::vector<double> value;
  std::optional<double> first_zero;
  bool touch_flagged = false;
};

struct EscapeReport {
  std::optional<Matrix> equilibrium;  // real phi0 used by the determinant criterion
  double escape_time = 0.0;           // +inf when no zero is found below t_max
  double t_max = 0.0;                 // scan cap
  bool horizon_ok = false;            // T < escape_time
  double margin = 0.0;                // escape_time - T
  std::string method;                 // "criterion" or "integration"
  bool touch_flagged = false;         // zero reached without a sign change
  DeltaScan scan;                     // samples of the function whose first zero was located
};

struct EscapeOptions {
  double scan_dt = 0.0;  // 0 -> 1e-3 * max(1, t_max)
  double t_max = 0.0;    // 0 -> 10 * T
  double tolerance = 1e-6;
  bool force_integration = false;
};

/// Every real equilibrium obtained from conjugation-closed n-dimensional
/// invariant subspaces of the Hamiltonian [[A, -S], [-(R_d - R_x), -A^T]]
/// with an invertible upper block. Symmetric, stabilizing solutions first.
std::vector<Matrix> riccati_equilibria(const ProblemSpec& spec);

/// First entry of riccati_equilibria(); throws NoRealEquilibrium when empty.
Matrix riccati_equilibrium(const ProblemSpec& spec);

/// Residual phi S phi - phi A - A^T phi - (R_d - R_x).
Matrix equilibrium_residual(const ProblemSpec& spec, const Matrix& phi0);

/// Delta(t, phi0) = det[I + int_0^t e^{Ab p} S e^{Ab' p} dp (M - phi0)],
/// Ab = A - S phi0, Ab' = A^T - phi0 S.
double escape_criterion(const ProblemSpec& spec, const Matrix& phi0, double t);

/// det X(t) of the linear Hamiltonian system whose ratio Y X^{-1} solves the
/// backward Riccati equation; the escape time is its first zero.
double riccati_denominator(const ProblemSpec& spec, double t);

/// Samples Delta(t, phi0) on [0, t_max] and locates its first zero.
DeltaScan scan_criterion(const ProblemSpec& spec, const Matrix& phi0, double scan_dt, double t_max,
                         double tolerance = 1e-6);

EscapeReport escape_time(const ProblemSpec& spec, const EscapeOptions& options = {});

/// Computes the escape report and throws HorizonInfeasible when T is not
/// below the escape time, unless override_horizon is set.
EscapeReport assert_horizon(const ProblemSpec& spec, bool override_horizon = false,
                            const EscapeOptions& options = {});

}  // namespace cct
