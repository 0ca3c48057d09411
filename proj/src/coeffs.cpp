#include "cct/coeffs.hpp"

#include "cct/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace cct {

namespace {

// Population-size dependent weights of the decomposed system. The limit
// system is the N -> infinity member of the same family.
struct Weights {
  double phi2sq_in_phi1;  // (N-1)/N^2
  double rx_in_phi1;      // (N-1)/N
  double phi2sq;          // (N-2)/N
  double alpha_phi2;      // (N-1)/N
  double beta_phi2;       // 1/N

  static Weights limit() { return {0.0, 1.0, 1.0, 1.0, 0.0}; }
  static Weights finite(int N) {
    const double n = N;
    if (N == 1) return {0.0, 0.0, -1.0, 0.0, 1.0};
    return {(n - 1.0) / (n * n), (n - 1.0) / n, (n - 2.0) / n, (n - 1.0) / n, 1.0 / n};
  }
};

struct State {
  Matrix phi1, phi2, alpha, beta;
};

State axpy(const State& y, double h, const State& k) {
  return {y.phi1 + h * k.phi1, y.phi2 + h * k.phi2, y.alpha + h * k.alpha, y.beta + h * k.beta};
}

struct System {
  const Matrix& A;
  const Matrix& S;
  const Matrix& R_x;
  const Matrix& R_d;
  Matrix Rd_dest;  // R_d d_j as columns
  Weights w;

  State rhs(const State& y) const {
    const Eigen::Index D = y.beta.cols();
    State dy;
    const Matrix Sphi1 = S * y.phi1;
    const Matrix Sphi2 = S * y.phi2;
    dy.phi1 = y.phi1.transpose() * Sphi1 + w.phi2sq_in_phi1 * (y.phi2.transpose() * Sphi2) -
              y.phi1 * A - A.transpose() * y.phi1 - R_d + w.rx_in_phi1 * R_x;
    dy.phi2 = y.phi1.transpose() * Sphi2 + y.phi2.transpose() * Sphi1 +
              w.phi2sq * (y.phi2.transpose() * Sphi2) - y.phi2 * A - A.transpose() * y.phi2 - R_x;

    const Matrix F1 = y.phi1 * S - A.transpose();
    const Matrix F2 = y.phi2 * S;
    const Vector F2_betaD = F2 * y.beta.col(D - 1);

    dy.beta = (F1 - w.beta_phi2 * F2) * y.beta - Rd_dest;
    dy.beta.colwise() += F2_betaD;

    dy.alpha = Matrix::Zero(y.alpha.rows(), D);
    if (D > 1) {
      const auto k = D - 1;
      Matrix beta_diff = y.beta.leftCols(k);
      beta_diff.colwise() -= y.beta.col(D - 1);
      dy.alpha.leftCols(k) = (F1 + w.alpha_phi2 * F2) * y.alpha.leftCols(k) - F2 * beta_diff;
    }
    return dy;
  }
};

double asymmetry(const Matrix& X) { return (X - X.transpose()).cwiseAbs().maxCoeff(); }

void symmetrize(Matrix& X) { X = 0.5 * (X + X.transpose()).eval(); }

bool blown_up(const State& y) {
  const auto bad = [](const Matrix& X) {
    return !X.allFinite() || X.cwiseAbs().maxCoeff() > kBlowUpThreshold;
  };
  return bad(y.phi1) || bad(y.phi2);
}

void integrate(const ProblemSpec& spec, double dt, const Weights& w, CoeffSet& out) {
  require_valid(spec);
  const int n = spec.n;
  const int D = spec.D();
  const double T = spec.T;
  const int K = step_count(T, dt);
  const double h = T / K;

  out.T = T;
  out.n = n;
  out.D = D;
  out.S = control_weight(spec);
  out.gain = spec.R_u.llt().solve(spec.B.transpose());
  out.A = spec.A;
  out.dest = destination_matrix(spec);

  System sys{spec.A, out.S, spec.R_x, spec.R_d, spec.R_d * out.dest, w};

  State y;
  y.phi1 = spec.M;
  y.phi2 = Matrix::Zero(n, n);
  y.alpha = Matrix::Zero(n, D);
  y.beta = spec.M * out.dest;

  std::vector<State> nodes(static_cast<std::size_t>(K) + 1);
  nodes[K] = y;
  double max_asym = 0.0;

  // Classic RK4 with negative step, from t = T down to t = 0.
  for (int k = K; k > 0; --k) {
    const double step = -h;
    const State k1 = sys.rhs(y);
    const State k2 = sys.rhs(axpy(y, 0.5 * step, k1));
    const State k3 = sys.rhs(axpy(y, 0.5 * step, k2));
    const State k4 = sys.rhs(axpy(y, step, k3));
    State next;
    next.phi1 = y.phi1 + (step / 6.0) * (k1.phi1 + 2.0 * k2.phi1 + 2.0 * k3.phi1 + k4.phi1);
    next.phi2 = y.phi2 + (step / 6.0) * (k1.phi2 + 2.0 * k2.phi2 + 2.0 * k3.phi2 + k4.phi2);
    next.alpha = y.alpha + (step / 6.0) * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
    next.beta = y.beta + (step / 6.0) * (k1.beta + 2.0 * k2.beta + 2.0 * k3.beta + k4.beta);
    if (blown_up(next)) throw EscapeDetected(h * (k - 1));
    max_asym = std::max({max_asym, asymmetry(next.phi1), asymmetry(next.phi2)});
    symmetrize(next.phi1);
    symmetrize(next.phi2);
    next.alpha.col(D - 1).setZero();
    y = std::move(next);
    nodes[k - 1] = y;
  }

  std::vector<Matrix> phi1(K + 1), phi2(K + 1), alpha(K + 1), beta(K + 1), W(K + 1);
  for (int k = 0; k <= K; ++k) {
    auto& s = nodes[k];
    W[k] = (0.5 * s.alpha - s.beta).transpose() * out.S * s.alpha;
    phi1[k] = std::move(s.phi1);
    phi2[k] = std::move(s.phi2);
    alpha[k] = std::move(s.alpha);
    beta[k] = std::move(s.beta);
  }
  out.phi1 = TimeGrid<Matrix>(T, std::move(phi1));
  out.phi2 = TimeGrid<Matrix>(T, std::move(phi2));
  out.alpha = TimeGrid<Matrix>(T, std::move(alpha));
  out.beta = TimeGrid<Matrix>(T, std::move(beta));
  out.W = TimeGrid<Matrix>(T, std::move(W));
  out.max_asymmetry = max_asym;

  out.W_int = 2.0 * trapezoid(out.W, [](const Matrix& X) -> Matrix { return X; });

  Vector d_Rd(D), d_M(D);
  for (int j = 0; j < D; ++j) {
    d_Rd[j] = out.dest.col(j).dot(spec.R_d * out.dest.col(j));
    d_M[j] = out.dest.col(j).dot(spec.M * out.dest.col(j));
  }
  const Matrix& S = out.S;
  out.beta_sq_int = trapezoid(out.beta, [&](const Matrix& b) -> Vector {
    return (b.transpose() * S).cwiseProduct(b.transpose()).rowwise().sum() - d_Rd;
  });
  out.chi_T = 0.5 * d_M;

  out.mean0 = moments(spec.dist, Matrix::Identity(n, n)).mean;
  const Matrix& a0 = out.alpha.front();
  const Matrix& b0 = out.beta.front();
  out.H.resize(D);
  for (int j = 0; j < D; ++j) {
    out.H[j] = -0.5 * out.beta_sq_int[j] + a0.col(j).dot(out.mean0) +
               0.5 * (d_M[j] - b0.col(j).squaredNorm());
  }
}

}  // namespace

LimitCoeffs solve_limit_coeffs(const ProblemSpec& spec, double dt) {
  LimitCoeffs c;
  integrate(spec, dt, Weights::limit(), c);
  return c;
}

FiniteCoeffs solve_finite_coeffs(const ProblemSpec& spec, int N, double dt) {
  if (N < 1) throw std::invalid_argument("solve_finite_coeffs: N must be >= 1");
  FiniteCoeffs c;
  c.N = N;
  integrate(spec, dt, Weights::finite(N), c);
  return c;
}

Vector assemble_psi(const CoeffSet& c, const Vector& P, int j, double t) {
  if (j < 0 || j >= c.D) throw std::out_of_range("assemble_psi: destination index out of range");
  if (P.size() != c.D) throw std::invalid_argument("assemble_psi: P has wrong size");
  if (t < 0.0 || t > c.T) throw std::out_of_range("assemble_psi: time outside [0, T]");
  return c.alpha.at(t) * P - c.beta.at(t).col(j);
}

double chi_at_zero(const CoeffSet& c, const Vector& P) {
  if (P.size() != c.D) throw std::invalid_argument("chi_at_zero: P has wrong size");
  return P.dot(c.chi_T) - 0.5 * P.dot(c.W_int * P) - 0.5 * P.dot(c.beta_sq_int);
}

FullSystemValue full_system_oracle(const ProblemSpec& spec, int N, const std::vector<int>& lambda,
                                   const Matrix& X0, double dt) {
  require_valid(spec);
  const int n = spec.n;
  const int Nn = N * n;
  if (N < 1 || Nn > 12) throw std::invalid_argument("full_system_oracle: requires 1 <= N*n <= 12");
  if (static_cast<int>(lambda.size()) != N || X0.cols() != N || X0.rows() != n)
    throw std::invalid_argument("full_system_oracle: lambda/X0 size mismatch");

  const Matrix I_N = Matrix::Identity(N, N);
  const Matrix ones = Matrix::Ones(N, N);
  auto kron = [](const Matrix& L, const Matrix& R) {
    Matrix K(L.rows() * R.rows(), L.cols() * R.cols());
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      for (Eigen::Index j = 0; j < L.cols(); ++j)
        K.block(i * R.rows(), j * R.cols(), R.rows(), R.cols()) = L(i, j) * R;
    return K;
  };
  const Matrix S = control_weight(spec);
  const Matrix SN = kron(I_N, S);
  const Matrix AN = kron(I_N, spec.A);
  const Matrix MN = kron(I_N, spec.M);
  const Matrix RdN = kron(I_N, spec.R_d);
  const Matrix QN = kron(I_N, spec.R_d - spec.R_x) + kron(ones / N, spec.R_x);

  Vector d_lambda(Nn);
  for (int i = 0; i < N; ++i) {
    if (lambda[i] < 0 || lambda[i] >= spec.D())
      throw std::out_of_range("full_system_oracle: destination index out of range");
    d_lambda.segment(i * n, n) = spec.destinations[lambda[i]];
  }
  const Vector forcing = RdN * d_lambda;
  const double chi_rate_const = d_lambda.dot(RdN * d_lambda);

  struct Y {
    Matrix phi;
    Vector Psi;
    double chi;
  };
  auto rhs = [&](const Y& y) {
    Y dy;
    dy.phi = y.phi.transpose() * SN * y.phi - y.phi * AN - AN.transpose() * y.phi - QN;
    dy.Psi = (y.phi * SN - AN.transpose()) * y.Psi + forcing;
    dy.chi = (y.Psi.dot(SN * y.Psi) - chi_rate_const) / (2.0 * N);
    return dy;
  };
  auto step_with = [](const Y& y, double h, const Y& k) {
    return Y{y.phi + h * k.phi, y.Psi + h * k.Psi, y.chi + h * k.chi};
  };

  const int K = step_count(spec.T, dt);
  const double h = -spec.T / K;
  Y y{MN, -MN * d_lambda, d_lambda.dot(MN * d_lambda) / (2.0 * N)};
  for (int k = K; k > 0; --k) {
    const Y k1 = rhs(y);
    const Y k2 = rhs(step_with(y, 0.5 * h, k1));
    const Y k3 = rhs(step_with(y, 0.5 * h, k2));
    const Y k4 = rhs(step_with(y, h, k3));
    y.phi += (h / 6.0) * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    y.Psi += (h / 6.0) * (k1.Psi + 2.0 * k2.Psi + 2.0 * k3.Psi + k4.Psi);
    y.chi += (h / 6.0) * (k1.chi + 2.0 * k2.chi + 2.0 * k3.chi + k4.chi);
    if (!y.phi.allFinite() || y.phi.cwiseAbs().maxCoeff() > kBlowUpThreshold)
      throw EscapeDetected(-h * (k - 1));
    y.phi = 0.5 * (y.phi + y.phi.transpose()).eval();
  }

  Vector X(Nn);
  for (int i = 0; i < N; ++i) X.segment(i * n, n) = X0.col(i);
  FullSystemValue v;
  v.phi0 = y.phi;
  v.Psi0 = y.Psi;
  v.chi0 = y.chi;
  v.cost = X.dot(y.phi * X) / (2.0 * N) + y.Psi.dot(X) / N + y.chi;
  return v;
}

}  // namespace cct
