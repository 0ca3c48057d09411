#include "cct/errors.hpp"
#include "cct/model.hpp"

#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cct;
using cct::testing::reference_spec;
using cct::testing::vec;

namespace {

bool mentions(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(ValidateSpec, ReferenceInstanceIsValid) {
  const auto r = validate_spec(reference_spec());
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.S.isApprox(Matrix::Identity(2, 2) / 50.0, 1e-15));
}

TEST(ValidateSpec, ZeroControlWeightRejected) {
  auto s = reference_spec();
  s.R_u = Matrix::Zero(2, 2);
  const auto r = validate_spec(s);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "R_u not positive definite"));
  EXPECT_THROW(require_valid(s), ValidationError);
}

TEST(ValidateSpec, DestinationDimensionMismatch) {
  auto s = reference_spec();
  s.destinations.push_back(vec({1, 2, 3}));
  const auto r = validate_spec(s);
  EXPECT_TRUE(mentions(r, "destination 3 dimension mismatch"));
}

TEST(ValidateSpec, OtherViolationsNamed) {
  auto s = reference_spec();
  s.M = -Matrix::Identity(2, 2);
  s.R_x = Matrix(2, 3);
  s.destinations.clear();
  const auto r = validate_spec(s);
  EXPECT_TRUE(mentions(r, "R_x dimension mismatch"));
  EXPECT_TRUE(mentions(r, "destination list is empty"));

  auto t = reference_spec();
  t.M = -Matrix::Identity(2, 2);
  t.R_d(0, 0) = -1.0;
  const auto r2 = validate_spec(t);
  EXPECT_TRUE(mentions(r2, "M not positive definite"));
  EXPECT_TRUE(mentions(r2, "R_d not positive semidefinite"));

  auto u = reference_spec();
  u.dist = UniformBox{vec({0, 0}), vec({1, 0})};
  EXPECT_TRUE(mentions(validate_spec(u), "lower < upper"));
}

TEST(ValidateSpec, PsdToleranceIsRelative) {
  auto s = reference_spec();
  s.R_x = Matrix::Identity(2, 2) * 1e6;
  s.R_x(1, 1) = -1e-7;  // -1e-13 relative to the largest eigenvalue
  EXPECT_TRUE(validate_spec(s).ok());
  s.R_x(1, 1) = -1e-3;
  EXPECT_FALSE(validate_spec(s).ok());
}

TEST(Moments, UniformBoxClosedForm) {
  const UniformBox box{vec({-50, -50}), vec({50, 50})};
  const auto m = moments(box, Matrix::Identity(2, 2));
  EXPECT_NEAR(m.mean.norm(), 0.0, 1e-15);
  EXPECT_NEAR(m.quad, 2.0 * 100.0 * 100.0 / 12.0, 1e-9);
  EXPECT_NEAR(m.second, 1666.6666666666667, 1e-9);
}

TEST(Moments, UniformBoxMatchesMonteCarlo) {
  const UniformBox box{vec({-50, -50}), vec({50, 50})};
  const auto m = moments(box, Matrix::Identity(2, 2));
  const Matrix X = sample_initial_states(box, 1000000, 11);
  const double mc = X.colwise().squaredNorm().mean();
  // Var(|x|^2) for this box is 2 * (100^4 / 180); 4 sigma of the sample mean.
  const double sigma = std::sqrt(2.0 * std::pow(100.0, 4) / 180.0 / 1e6);
  EXPECT_NEAR(mc, m.second, 4.0 * sigma);
}

TEST(Moments, SecondMomentAnalyticFormula) {
  const UniformBox box{vec({-1, 2, 0.5}), vec({3, 2.5, 4})};
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = box.upper[k] - box.lower[k];
    const double c = 0.5 * (box.upper[k] + box.lower[k]);
    expected += w * w / 12.0 + c * c;
  }
  EXPECT_NEAR(moments(box, Matrix::Identity(3, 3)).second, expected, 1e-12 * expected);
}

TEST(Moments, QuadraticFormWithGeneralQ) {
  const UniformBox box{vec({-1, 0}), vec({3, 1})};
  Matrix Q(2, 2);
  Q << 2, 0.5, 0.5, 1;
  const auto m = moments(box, Q);
  // E[x^T Q x] = tr(Q Cov) + mean^T Q mean.
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 16.0 / 12.0;
  cov(1, 1) = 1.0 / 12.0;
  const Vector mu = vec({1, 0.5});
  EXPECT_NEAR(m.quad, (Q * cov).trace() + mu.dot(Q * mu), 1e-12);
}

TEST(Moments, EmpiricalTwoPoints) {
  Empirical e{Matrix(2, 2)};
  e.points << 1, -1, 0, 0;
  const auto m = moments(e, Matrix::Identity(2, 2));
  EXPECT_NEAR(m.mean.norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.quad, 1.0);
  EXPECT_DOUBLE_EQ(m.second, 1.0);
}

TEST(Moments, SymmetricBoxHasZeroMean) {
  std::mt19937_64 rng(3);
  const UniformBox box{vec({-2, -7}), vec({2, 7})};
  Matrix Q = cct::testing::random_psd(rng, 2, 1.0, 0.1);
  EXPECT_NEAR(moments(box, Q).mean.norm(), 0.0, 1e-15);
}

TEST(Sampling, DeterministicInSeed) {
  const UniformBox box{vec({-50, -50}), vec({50, 50})};
  const Matrix a = sample_initial_states(box, 100, 42);
  const Matrix b = sample_initial_states(box, 100, 42);
  const Matrix c = sample_initial_states(box, 100, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_TRUE((a.array() >= -50).all() && (a.array() < 50).all());
}

TEST(Sampling, LawOfLargeNumbers) {
  const UniformBox box{vec({-50, -50}), vec({50, 50})};
  const Matrix X = sample_initial_states(box, 100000, 7);
  const Vector mean = X.rowwise().mean();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.5);
}

TEST(Sampling, EmpiricalVerbatimAndResampled) {
  Empirical e{Matrix(2, 3)};
  e.points << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(sample_initial_states(e, 3, 99), e.points);
  const Matrix R = sample_initial_states(e, 50, 1);
  for (Eigen::Index i = 0; i < R.cols(); ++i) {
    bool found = false;
    for (Eigen::Index k = 0; k < 3; ++k) found = found || R.col(i) == e.points.col(k);
    EXPECT_TRUE(found);
  }
}

TEST(SimplexVector, RejectsOffSimplex) {
  EXPECT_NO_THROW(SimplexVector(vec({0.25, 0.75})));
  EXPECT_NO_THROW(SimplexVector(vec({0.5, 0.5 + 5e-13})));
  EXPECT_THROW(SimplexVector(vec({0.5, 0.5 + 1e-9})), std::invalid_argument);
  EXPECT_THROW(SimplexVector(vec({1.1, -0.1})), std::invalid_argument);
  EXPECT_EQ(SimplexVector::vertex(3, 1).values(), vec({0, 1, 0}));
  EXPECT_NEAR(SimplexVector::uniform(4)[2], 0.25, 0.0);
}
