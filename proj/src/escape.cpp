#include "cct/escape.hpp"

#include "cct/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>

namespace cct {

namespace {

using CMatrix = Eigen::MatrixXcd;

double scale_of(const ProblemSpec& spec, const Matrix& S) {
  return spec.A.norm() + S.norm() + (spec.R_d - spec.R_x).norm();
}

// Sign-change search with bisection refinement; f(0) is assumed positive.
DeltaScan scan_first_zero(const std::function<double(double)>& f, double scan_dt, double t_max,
                          double tolerance) {
  DeltaScan scan;
  const int K = std::max(1, static_cast<int>(std::ceil(t_max / scan_dt)));
  const double h = t_max / K;
  double max_abs = 1.0;
  for (int k = 0; k <= K; ++k) {
    const double t = h * k;
    const double v = f(t);
    if (!std::isfinite(v)) break;
    scan.t.push_back(t);
    scan.value.push_back(v);
    if (k > 0 && v <= 0.0) {
      double lo = scan.t[k - 1];
      double hi = t;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      scan.first_zero = 0.5 * (lo + hi);
      return scan;
    }
    // A local minimum of |f| close to zero may hide a double root between
    // samples; minimize |f| there by golden section.
    if (k >= 2) {
      const double a = scan.value[k - 2], b = scan.value[k - 1], c = v;
      if (b < a && b <= c && b < 1e-3 * max_abs) {
        double lo = scan.t[k - 2], hi = t;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        while (hi - lo > tolerance) {
          if (f1 <= 0.0 || f2 <= 0.0) break;
          if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = f(x1);
          } else {
            lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = f(x2);
          }
        }
        const double xm = f1 < f2 ? x1 : x2;
        if (std::min(f1, f2) <= 1e-9 * max_abs) {
          scan.first_zero = xm;
          scan.touch_flagged = true;
          return scan;
        }
      }
    }
    max_abs = std::max(max_abs, std::abs(v));
  }
  return scan;
}

}  // namespace

Matrix equilibrium_residual(const ProblemSpec& spec, const Matrix& phi0) {
  const Matrix S = control_weight(spec);
  return phi0 * S * phi0 - phi0 * spec.A - spec.A.transpose() * phi0 - (spec.R_d - spec.R_x);
}

std::vector<Matrix> riccati_equilibria(const ProblemSpec& spec) {
  require_valid(spec);
  const int n = spec.n;
  const Matrix S = control_weight(spec);
  const Matrix Q = spec.R_d - spec.R_x;
  Matrix Ham(2 * n, 2 * n);
  Ham << spec.A, -S, -Q, -spec.A.transpose();

  Eigen::EigenSolver<Matrix> es(Ham);
  if (es.info() != Eigen::Success) return {};
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const CMatrix V = es.eigenvectors();
  const int m = 2 * n;
  const double eig_tol = 1e-8 * std::max(1.0, Ham.norm());

  // Real invariant subspaces are assembled from blocks: a real eigenvector,
  // or span{Re w, Im w} for w in the eigenspace of a complex eigenvalue with
  // positive imaginary part. Repeated complex eigenvalues have a continuum of
  // such planes, so a few fixed combinations of their eigenvectors are tried.
  struct Block {
    Matrix basis;
    double abscissa;
  };
  std::vector<Block> blocks;
  std::vector<char> done(m, 0);
  for (int i = 0; i < m; ++i) {
    if (done[i]) continue;
    if (std::abs(lambda[i].imag()) <= eig_tol) {
      blocks.push_back({V.col(i).real(), lambda[i].real()});
      done[i] = 1;
      continue;
    }
    if (lambda[i].imag() < 0.0) continue;
    std::vector<int> cluster;
    for (int k = i; k < m; ++k)
      if (!done[k] && std::abs(lambda[k] - lambda[i]) <= eig_tol) cluster.push_back(k);
    for (int k : cluster) done[k] = 1;
    std::vector<Eigen::VectorXcd> combos;
    for (int k : cluster) combos.push_back(V.col(k));
    if (cluster.size() > 1) {
      for (int variant = 1; variant <= 2; ++variant) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(m);
        for (std::size_t k = 0; k < cluster.size(); ++k)
          w += std::polar(1.0, 0.5 * M_PI * variant * static_cast<double>(k)) * V.col(cluster[k]);
        combos.push_back(w);
      }
    }
    for (const auto& w : combos) {
      Matrix b(m, 2);
      b.col(0) = w.real();
      b.col(1) = w.imag();
      blocks.push_back({b, lambda[i].real()});
    }
  }

  struct Candidate {
    Matrix phi;
    bool symmetric;
    double spectral_abscissa;
  };
  std::vector<Candidate> found;
  const double scale = std::max(1.0, scale_of(spec, S));
  const int nb = static_cast<int>(blocks.size());
  if (nb > 20) return {};

  for (unsigned mask = 1; mask < (1u << nb); ++mask) {
    int dim = 0;
    for (int b = 0; b < nb; ++b)
      if ((mask >> b) & 1u) dim += static_cast<int>(blocks[b].basis.cols());
    if (dim != n) continue;
    Matrix U(m, n);
    double abscissa = -std::numeric_limits<double>::infinity();
    for (int b = 0, c = 0; b < nb; ++b) {
      if (!((mask >> b) & 1u)) continue;
      const auto k = blocks[b].basis.cols();
      U.middleCols(c, k) = blocks[b].basis;
      c += static_cast<int>(k);
      abscissa = std::max(abscissa, blocks[b].abscissa);
    }
    const Matrix U1 = U.topRows(n);
    const Matrix U2 = U.bottomRows(n);
    Eigen::JacobiSVD<Matrix> svd(U1);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 1e-10 * std::max(1.0, U.norm())) continue;
    Matrix phi = U2 * U1.inverse();
    if (!phi.allFinite()) continue;
    if (equilibrium_residual(spec, phi).norm() > 1e-8 * scale * std::max(1.0, phi.norm() * phi.norm()))
      continue;
    const bool sym = (phi - phi.transpose()).cwiseAbs().maxCoeff() <=
                     1e-9 * std::max(1.0, phi.cwiseAbs().maxCoeff());
    if (sym) phi = 0.5 * (phi + phi.transpose()).eval();
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Candidate& c) {
      return (c.phi - phi).norm() <= 1e-7 * std::max(1.0, phi.norm());
    });
    if (!duplicate) found.push_back({std::move(phi), sym, abscissa});
  }

  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    if (a.symmetric != b.symmetric) return a.symmetric;
    return a.spectral_abscissa < b.spectral_abscissa;
  });
  std::vector<Matrix> out;
  out.reserve(found.size());
  for (auto& c : found) out.push_back(std::move(c.phi));
  return out;
}

Matrix riccati_equilibrium(const ProblemSpec& spec) {
  auto all = riccati_equilibria(spec);
  if (all.empty()) throw NoRealEquilibrium();
  return all.front();
}

double escape_criterion(const ProblemSpec& spec, const Matrix& phi0, double t) {
  const int n = spec.n;
  const Matrix S = control_weight(spec);
  const Matrix I = Matrix::Identity(n, n);
  if (t == 0.0) return 1.0;
  const Matrix Ab = spec.A - S * phi0;
  const Matrix Ab2 = spec.A.transpose() - phi0 * S;
  // exp([[-Ab, S], [0, Ab2]] t) has upper-right block
  //   int_0^t e^{-Ab (t-p)} S e^{Ab2 p} dp,
  // so premultiplying by e^{Ab t} yields the required Gramian-type integral.
  Matrix C = Matrix::Zero(2 * n, 2 * n);
  C.topLeftCorner(n, n) = -Ab * t;
  C.topRightCorner(n, n) = S * t;
  C.bottomRightCorner(n, n) = Ab2 * t;
  const Matrix E = C.exp();
  const Matrix G = E.topLeftCorner(n, n).partialPivLu().solve(E.topRightCorner(n, n));
  return (I + G * (spec.M - phi0)).determinant();
}

double riccati_denominator(const ProblemSpec& spec, double t) {
  const int n = spec.n;
  const Matrix S = control_weight(spec);
  // In backward time tau, phi = Y X^{-1} with
  //   X' = -A X + S Y,  Y' = (R_d - R_x) X + A^T Y,  X(0) = I,  Y(0) = M.
  Matrix H(2 * n, 2 * n);
  H << -spec.A, S, spec.R_d - spec.R_x, spec.A.transpose();
  Matrix Z0(2 * n, n);
  Z0 << Matrix::Identity(n, n), spec.M;
  const Matrix Z = (H * t).exp() * Z0;
  return Z.topRows(n).determinant();
}

DeltaScan scan_criterion(const ProblemSpec& spec, const Matrix& phi0, double scan_dt, double t_max,
                         double tolerance) {
  return scan_first_zero([&](double t) { return escape_criterion(spec, phi0, t); }, scan_dt, t_max,
                         tolerance);
}

EscapeReport escape_time(const ProblemSpec& spec, const EscapeOptions& options) {
  require_valid(spec);
  EscapeReport report;
  report.t_max = options.t_max > 0.0 ? options.t_max : 10.0 * spec.T;
  const double scan_dt = options.scan_dt > 0.0 ? options.scan_dt : 1e-3 * std::max(1.0, report.t_max);

  DeltaScan scan;
  if (!options.force_integration) {
    auto eq = riccati_equilibria(spec);
    if (!eq.empty()) report.equilibrium = eq.front();
  }
  if (report.equilibrium) {
    report.method = "criterion";
    scan = scan_criterion(spec, *report.equilibrium, scan_dt, report.t_max, options.tolerance);
  } else {
    report.method = "integration";
    scan = scan_first_zero([&](double t) { return riccati_denominator(spec, t); }, scan_dt,
                           report.t_max, options.tolerance);
  }
  report.escape_time = scan.first_zero.value_or(std::numeric_limits<double>::infinity());
  report.touch_flagged = scan.touch_flagged;
  report.horizon_ok = spec.T < report.escape_time;
  report.scan = std::move(scan);
  report.margin = report.escape_time - spec.T;
  return report;
}

EscapeReport assert_horizon(const ProblemSpec& spec, bool override_horizon,
                            const EscapeOptions& options) {
  auto report = escape_time(spec, options);
  if (!report.horizon_ok && !override_horizon) throw HorizonInfeasible(spec.T, report.escape_time);
  return report;
}

}  // namespace cct
