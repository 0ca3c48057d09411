#pragma once

#include "cct/escape.hpp"
#include "cct/model.hpp"

#include <initializer_list>
#include <random>
#include <vector>

namespace cct::testing {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline ProblemSpec reference_spec(double T = 3.0) {
  ProblemSpec s;
  s.n = 2;
  s.m = 2;
  s.A = Matrix::Zero(2, 2);
  s.B = Matrix::Identity(2, 2);
  s.R_x = Matrix::Identity(2, 2);
  s.R_d = 0.1 * Matrix::Identity(2, 2);
  s.R_u = 50.0 * Matrix::Identity(2, 2);
  s.M = 400.0 * Matrix::Identity(2, 2);
  s.destinations = {vec({-5, -3}), vec({7, 8})};
  s.T = T;
  s.dist = UniformBox{Vector::Constant(2, -50.0), Vector::Constant(2, 50.0)};
  return s;
}

// Scalar (n = m = 1) spec with a uniform initial distribution on [lo, hi].
inline ProblemSpec scalar_spec(double a, double b, double rx, double rd, double ru, double m,
                               std::vector<double> dests, double T, double lo = -1.0, double hi = 1.0) {
  ProblemSpec s;
  s.n = 1;
  s.m = 1;
  s.A = Matrix::Constant(1, 1, a);
  s.B = Matrix::Constant(1, 1, b);
  s.R_x = Matrix::Constant(1, 1, rx);
  s.R_d = Matrix::Constant(1, 1, rd);
  s.R_u = Matrix::Constant(1, 1, ru);
  s.M = Matrix::Constant(1, 1, m);
  for (double d : dests) s.destinations.push_back(Vector::Constant(1, d));
  s.T = T;
  s.dist = UniformBox{Vector::Constant(1, lo), Vector::Constant(1, hi)};
  return s;
}

inline Matrix random_psd(std::mt19937_64& rng, int n, double scale, double shift) {
  std::normal_distribution<double> N01;
  Matrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = N01(rng);
  return scale * (G * G.transpose()) / n + shift * Matrix::Identity(n, n);
}

// Random well-posed instance whose horizon lies below the escape time.
inline ProblemSpec random_spec(std::mt19937_64& rng, int n, int D, double T = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (;;) {
    ProblemSpec s;
    s.n = n;
    s.m = n;
    s.A = Matrix(n, n);
    s.B = Matrix(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        s.A(i, j) = 0.3 * U(rng);
        s.B(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * U(rng);
      }
    s.R_x = random_psd(rng, n, 0.5, 0.0);
    s.R_d = random_psd(rng, n, 0.5, 0.1);
    s.R_u = random_psd(rng, n, 0.5, 0.5);
    s.M = random_psd(rng, n, 1.0, 0.5);
    for (int j = 0; j < D; ++j) {
      Vector d(n);
      for (int k = 0; k < n; ++k) d[k] = 3.0 * U(rng);
      s.destinations.push_back(d);
    }
    s.T = T;
    s.dist = UniformBox{Vector::Constant(n, -2.0), Vector::Constant(n, 2.0)};
    if (validate_spec(s).ok() && escape_time(s).escape_time > 2.0 * T) return s;
  }
}

}  // namespace cct::testing
