#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cct {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Uniform distribution on the axis-aligned box [lower, upper].
struct UniformBox {
  Vector lower;
  Vector upper;
};

/// Empirical distribution: equal mass on each column of `points` (n x K).
struct Empirical {
  Matrix points;
};

using InitialDistribution = std::variant<UniformBox, Empirical>;

int dimension(const InitialDistribution& dist);

/// Full model instance. Plain aggregate; call validate_spec() before use.
struct ProblemSpec {
  int n = 0;
  int m = 0;
  Matrix A;
  Matrix B;
  Matrix R_x;  // congestion weight
  Matrix R_d;  // stress weight
  Matrix R_u;  // control weight
  Matrix M;    // terminal weight
  std::vector<Vector> destinations;
  double T = 0.0;
  InitialDistribution dist;

  int D() const { return static_cast<int>(destinations.size()); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  Matrix S;  // B R_u^{-1} B^T, empty when the spec is invalid

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const ProblemSpec& spec);

/// Throws ValidationError listing every violation.
void require_valid(const ProblemSpec& spec);

/// S = B R_u^{-1} B^T, symmetrized. Assumes R_u is positive definite.
Matrix control_weight(const ProblemSpec& spec);

/// Destinations as the columns of an n x D matrix.
Matrix destination_matrix(const ProblemSpec& spec);

struct Moments {
  Vector mean;    // E[x]
  double quad;    // E[x^T Q x]
  double second;  // E[|x|^2]
};

Moments moments(const InitialDistribution& dist, const Matrix& Q);

/// N i.i.d. draws as the columns of an n x N matrix. Deterministic in seed;
/// an empirical distribution with N equal to its size is returned verbatim.
Matrix sample_initial_states(const InitialDistribution& dist, int N, std::uint64_t seed);

/// A point of the probability simplex.
class SimplexVector {
 public:
  static constexpr double kTolerance = 1e-12;

  SimplexVector() = default;
  /// Throws std::invalid_argument when p is off the simplex by more than kTolerance.
  explicit SimplexVector(Vector p);

  static SimplexVector vertex(int D, int j);
  static SimplexVector uniform(int D);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int j) const { return p_[j]; }
  const Vector& values() const { return p_; }

 private:
  Vector p_;
};

}  // namespace cct
