#include "cct/model.hpp"

#include "cct/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cct {

namespace {

std::string shape(const Matrix& X) {
  std::ostringstream os;
  os << X.rows() << "x" << X.cols();
  return os.str();
}

void check_shape(std::vector<std::string>& out, const char* name, const Matrix& X, Eigen::Index rows,
                 Eigen::Index cols) {
  if (X.rows() != rows || X.cols() != cols) {
    std::ostringstream os;
    os << name << " dimension mismatch: expected " << rows << "x" << cols << ", got " << shape(X);
    out.push_back(os.str());
  }
}

bool is_symmetric(const Matrix& X) {
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  return (X - X.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// PSD up to 1e-12 relative to the largest eigenvalue magnitude.
bool is_psd(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (X + X.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() >= -1e-12 * scale;
}

bool is_pd(const Matrix& X) {
  if (X.size() == 0) return false;
  Eigen::LLT<Matrix> llt(0.5 * (X + X.transpose()));
  return llt.info() == Eigen::Success;
}

// 53-bit uniform in [0,1); avoids the implementation-defined std distributions
// so samples are identical across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int dimension(const InitialDistribution& dist) {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformBox>)
          return static_cast<int>(d.lower.size());
        else
          return static_cast<int>(d.points.rows());
      },
      dist);
}

ValidationError::ValidationError(const std::vector<std::string>& violations)
    : Error("ValidationError",
            [&] {
              std::string s = "invalid problem specification:";
              for (const auto& v : violations) s += "\n  - " + v;
              return s;
            }()),
      violations_(violations) {}

ValidationReport validate_spec(const ProblemSpec& spec) {
  ValidationReport report;
  auto& out = report.violations;
  const int n = spec.n;
  const int m = spec.m;
  if (n <= 0) out.push_back("n must be positive");
  if (m <= 0) out.push_back("m must be positive");
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) out.push_back("T must be a positive finite number");
  if (!out.empty()) return report;

  check_shape(out, "A", spec.A, n, n);
  check_shape(out, "B", spec.B, n, m);
  check_shape(out, "R_x", spec.R_x, n, n);
  check_shape(out, "R_d", spec.R_d, n, n);
  check_shape(out, "R_u", spec.R_u, m, m);
  check_shape(out, "M", spec.M, n, n);
  const bool shapes_ok = out.empty();

  if (spec.destinations.empty()) out.push_back("destination list is empty");
  for (std::size_t j = 0; j < spec.destinations.size(); ++j) {
    if (spec.destinations[j].size() != n) {
      out.push_back("destination " + std::to_string(j + 1) + " dimension mismatch: expected " +
                    std::to_string(n) + ", got " + std::to_string(spec.destinations[j].size()));
    }
  }

  if (shapes_ok) {
    for (const auto& [name, X] : {std::pair<const char*, const Matrix*>{"R_x", &spec.R_x},
                                  {"R_d", &spec.R_d}, {"R_u", &spec.R_u}, {"M", &spec.M}}) {
      if (!is_symmetric(*X)) out.push_back(std::string(name) + " not symmetric");
    }
    if (!is_psd(spec.R_x)) out.push_back("R_x not positive semidefinite");
    if (!is_psd(spec.R_d)) out.push_back("R_d not positive semidefinite");
    if (!is_pd(spec.R_u)) out.push_back("R_u not positive definite");
    if (!is_pd(spec.M)) out.push_back("M not positive definite");
  }

  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformBox>) {
          if (d.lower.size() != n || d.upper.size() != n) {
            out.push_back("uniform box bounds dimension mismatch");
          } else if (!(d.lower.array() < d.upper.array()).all()) {
            out.push_back("uniform box requires lower < upper componentwise");
          }
        } else {
          if (d.points.cols() < 1) out.push_back("empirical distribution has no points");
          if (d.points.rows() != n) out.push_back("empirical points dimension mismatch");
        }
      },
      spec.dist);

  if (out.empty()) report.S = control_weight(spec);
  return report;
}

void require_valid(const ProblemSpec& spec) {
  auto report = validate_spec(spec);
  if (!report.ok()) throw ValidationError(report.violations);
}

Matrix control_weight(const ProblemSpec& spec) {
  Eigen::LLT<Matrix> llt(spec.R_u);
  Matrix S = spec.B * llt.solve(spec.B.transpose());
  return 0.5 * (S + S.transpose());
}

Matrix destination_matrix(const ProblemSpec& spec) {
  Matrix d(spec.n, spec.D());
  for (int j = 0; j < spec.D(); ++j) d.col(j) = spec.destinations[j];
  return d;
}

Moments moments(const InitialDistribution& dist, const Matrix& Q) {
  return std::visit(
      [&](const auto& d) -> Moments {
        using T = std::decay_t<decltype(d)>;
        Moments mo;
        if constexpr (std::is_same_v<T, UniformBox>) {
          mo.mean = 0.5 * (d.lower + d.upper);
          const Vector var = (d.upper - d.lower).array().square() / 12.0;
          mo.quad = Q.diagonal().dot(var) + mo.mean.dot(Q * mo.mean);
          mo.second = var.sum() + mo.mean.squaredNorm();
        } else {
          const double K = static_cast<double>(d.points.cols());
          mo.mean = d.points.rowwise().sum() / K;
          mo.quad = (d.points.transpose() * Q).cwiseProduct(d.points.transpose()).sum() / K;
          mo.second = d.points.squaredNorm() / K;
        }
        return mo;
      },
      dist);
}

Matrix sample_initial_states(const InitialDistribution& dist, int N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_initial_states: N must be >= 1");
  std::mt19937_64 rng(seed);
  return std::visit(
      [&](const auto& d) -> Matrix {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformBox>) {
          const Eigen::Index n = d.lower.size();
          Matrix X(n, N);
          const Vector width = d.upper - d.lower;
          for (int i = 0; i < N; ++i)
            for (Eigen::Index k = 0; k < n; ++k) X(k, i) = d.lower[k] + width[k] * unit_uniform(rng);
          return X;
        } else {
          const Eigen::Index K = d.points.cols();
          if (K == N) return d.points;
          Matrix X(d.points.rows(), N);
          for (int i = 0; i < N; ++i) {
            auto idx = static_cast<Eigen::Index>(unit_uniform(rng) * static_cast<double>(K));
            X.col(i) = d.points.col(std::min(idx, K - 1));
          }
          return X;
        }
      },
      dist);
}

SimplexVector::SimplexVector(Vector p) : p_(std::move(p)) {
  if (p_.size() == 0) throw std::invalid_argument("SimplexVector: empty vector");
  if ((p_.array() < -kTolerance).any() || !p_.allFinite())
    throw std::invalid_argument("SimplexVector: negative or non-finite component");
  if (std::abs(p_.sum() - 1.0) > kTolerance)
    throw std::invalid_argument("SimplexVector: components do not sum to 1");
  p_ = p_.cwiseMax(0.0);
}

SimplexVector SimplexVector::vertex(int D, int j) {
  Vector p = Vector::Zero(D);
  p[j] = 1.0;
  return SimplexVector(std::move(p));
}

SimplexVector SimplexVector::uniform(int D) {
  return SimplexVector(Vector::Constant(D, 1.0 / D));
}

}  // namespace cct
