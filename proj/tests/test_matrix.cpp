#include <gtest/gtest.h>

#include <cmath>

#include "salsa/errors.hpp"
#include "salsa/matrix.hpp"
#include "support.hpp"

namespace salsa {
namespace {

using testing::gaussian;
using testing::gaussian_vector;

TEST(OlsSolve, OrthonormalColumnsReadOffCoordinates) {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  Vector b(3);
  b << 2, 3, 5;
  const Vector phi = ols_solve(a, b);
  EXPECT_NEAR(phi(0), 2.0, 1e-14);
  EXPECT_NEAR(phi(1), 3.0, 1e-14);
}

TEST(OlsSolve, ConstantColumnGivesMean) {
  Matrix a(2, 1);
  a << 1, 1;
  Vector b(2);
  b << 0, 2;
  EXPECT_NEAR(ols_solve(a, b)(0), 1.0, 1e-14);
}

TEST(OlsSolve, MatchesNormalEquations) {
  const Matrix a = gaussian(40, 6, 11);
  const Vector b = gaussian_vector(40, 12);
  const Vector want = testing::normal_equations(a, b);
  for (const auto method : {OlsMethod::ColumnPivotedQR, OlsMethod::HouseholderQR}) {
    const Vector phi = ols_solve(a, b, kDefaultRankTol, method);
    EXPECT_LE((phi - want).norm(), 1e-8 * want.norm());
  }
}

TEST(OlsSolve, ResidualIsOrthogonalToRange) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Matrix a = gaussian(30 + static_cast<Index>(seed), 5, 100 + seed);
    const Vector b = gaussian_vector(a.rows(), 200 + seed);
    const Vector r = a * ols_solve(a, b) - b;
    EXPECT_LE((a.transpose() * r).norm(), 1e-8 * a.norm() * b.norm());
  }
}

TEST(OlsSolve, RankDeficientColumnIsRejected) {
  Matrix a = gaussian(20, 3, 3);
  a.col(2) = 2.0 * a.col(0) - a.col(1);
  const Vector b = gaussian_vector(20, 4);
  for (const auto method : {OlsMethod::ColumnPivotedQR, OlsMethod::HouseholderQR}) {
    try {
      ols_solve(a, b, kDefaultRankTol, method);
      FAIL() << "expected RankDeficient";
    } catch (const NumericalError& e) {
      EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
    }
  }
}

TEST(OlsSolve, ShapeErrors) {
  const Matrix a = gaussian(5, 2, 1);
  EXPECT_THROW(ols_solve(a, Vector::Zero(4)), NumericalError);
  EXPECT_THROW(ols_solve(gaussian(2, 3, 1), Vector::Zero(2)), NumericalError);
}

TEST(GramInverse, AppendOrthonormalColumn) {
  Matrix a = Matrix::Zero(3, 1);
  a(0, 0) = 1.0;
  Vector e2 = Vector::Zero(3);
  e2(1) = 1.0;
  const GramInverse g = gram_inverse_append(GramInverse::of(a), a, e2);
  EXPECT_LE((g.inverse - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(GramInverse, AppendOrthogonalColumnsOfNormSqrt2) {
  Matrix a(2, 1);
  a << 1, 1;
  Vector c(2);
  c << 1, -1;
  const GramInverse g = gram_inverse_append(GramInverse::of(a), a, c);
  EXPECT_LE((g.inverse - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(GramInverse, AppendMatchesDirectInversion) {
  const Matrix a = gaussian(30, 4, 21);
  const Vector c = gaussian_vector(30, 22);
  Matrix aug(30, 5);
  aug << a, c;
  const Matrix direct = (aug.transpose() * aug).fullPivLu().inverse();
  const GramInverse g = gram_inverse_append(GramInverse::of(a), a, c);
  EXPECT_LE((g.inverse - direct).norm(), 1e-8 * direct.norm());
}

TEST(GramInverse, RepeatedAppendMatchesDirectInversion) {
  const Matrix a = gaussian(50, 8, 31);
  GramInverse g = GramInverse::of(a.leftCols(1));
  for (Index d = 1; d < 8; ++d) g = gram_inverse_append(g, a.leftCols(d), a.col(d));
  const Matrix direct = (a.transpose() * a).fullPivLu().inverse();
  for (Index i = 0; i < 8; ++i) {
    for (Index j = 0; j < 8; ++j) {
      EXPECT_LE(std::abs(g.inverse(i, j) - direct(i, j)), 1e-7 * std::abs(direct(i, j)) + 1e-15);
    }
  }
  // Symmetric and positive definite.
  EXPECT_LE((g.inverse - g.inverse.transpose()).norm(), 1e-10 * g.inverse.norm());
  EXPECT_EQ(Eigen::LLT<Matrix>(g.inverse).info(), Eigen::Success);
}

TEST(GramInverse, ColumnInSpanIsRejected) {
  const Matrix a = gaussian(10, 2, 41);
  const Vector c = a.col(0) + 3.0 * a.col(1);
  try {
    gram_inverse_append(GramInverse::of(a), a, c);
    FAIL() << "expected NearSingularUpdate";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearSingularUpdate);
  }
}

TEST(ConditionNumber, OrthonormalColumns) {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  EXPECT_NEAR(condition_number(a), 1.0, 1e-14);
}

TEST(ConditionNumber, EmbeddedDiagonal) {
  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = 4.0;
  a(1, 1) = 1.0;
  EXPECT_NEAR(condition_number(a), 4.0, 1e-13);
}

TEST(ConditionNumber, MatchesPseudoinverseProduct) {
  const Matrix a = gaussian(50, 5, 51);
  const Matrix pinv = (a.transpose() * a).fullPivLu().inverse() * a.transpose();
  const double oracle = a.jacobiSvd().singularValues()(0) * pinv.jacobiSvd().singularValues()(0);
  EXPECT_NEAR(condition_number(a), oracle, 1e-6 * oracle);
}

TEST(ConditionNumber, ScaleInvariant) {
  const Matrix a = gaussian(20, 4, 61);
  const double k = condition_number(a);
  for (const double c : {-3.0, 1e-5, 7e4}) {
    EXPECT_NEAR(condition_number(c * a), k, 1e-10 * k);
  }
}

TEST(ConditionNumber, SingularIsRankDeficient) {
  Matrix a = gaussian(10, 3, 71);
  a.col(2) = a.col(1);
  EXPECT_THROW(condition_number(a), NumericalError);
}

TEST(Norms, Pythagorean) {
  Vector v(2);
  v << 3, 4;
  EXPECT_DOUBLE_EQ(two_norm(v), 5.0);
}

TEST(Norms, Identity) {
  const Matrix i = Matrix::Identity(2, 2);
  EXPECT_NEAR(spectral_norm(i), 1.0, 1e-15);
  EXPECT_NEAR(frobenius_norm(i), std::sqrt(2.0), 1e-15);
}

TEST(Norms, SpectralBelowFrobenius) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix a = gaussian(20, 3, 1000 + seed);
    EXPECT_LE(spectral_norm(a), frobenius_norm(a) * (1.0 + 1e-12));
  }
}

TEST(RequireFinite, RejectsNaN) {
  Matrix a = Matrix::Zero(2, 2);
  EXPECT_NO_THROW(require_finite(a, "a"));
  a(1, 0) = std::nan("");
  EXPECT_THROW(require_finite(a, "a"), NumericalError);
}

}  // namespace
}  // namespace salsa
