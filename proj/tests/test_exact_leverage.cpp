#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "salsa/errors.hpp"
#include "salsa/exact_leverage.hpp"
#include "support.hpp"

namespace salsa {
namespace {

using testing::explicit_hat_diagonal;
using testing::gaussian;

Matrix column(std::initializer_list<double> v) {
  Matrix a(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (const double x : v) a(i++, 0) = x;
  return a;
}

TEST(HatLeverage, IdentityIsAllOnes) {
  const LeverageScores ls = hat_leverage(Matrix::Identity(3, 3));
  EXPECT_LE((ls.scores - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(ls.d, 3);
}

TEST(HatLeverage, SingleColumnBaseCase) {
  const LeverageScores ls = hat_leverage(column({3, 4}));
  EXPECT_NEAR(ls.scores(0), 9.0 / 25.0, 1e-15);
  EXPECT_NEAR(ls.scores(1), 16.0 / 25.0, 1e-15);
}

TEST(HatLeverage, MatchesExplicitHatMatrix) {
  const Matrix a = gaussian(60, 6, 7);
  const Vector want = explicit_hat_diagonal(a);
  EXPECT_LE((hat_leverage(a).scores - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(HatLeverage, BlockedQFactorAcrossManyBlocks) {
  const Matrix a = gaussian(70000, 3, 8);
  const Vector want = explicit_hat_diagonal(a);
  const LeverageScores ls = hat_leverage(a);
  EXPECT_LE((ls.scores - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(ls.sum(), 3.0, 1e-9);
}

TEST(HatLeverage, RankDeficientIsRejected) {
  Matrix a = gaussian(10, 3, 9);
  a.col(1) = a.col(0);
  EXPECT_THROW(hat_leverage(a), NumericalError);
}

TEST(HatLeverage, ScoresInUnitIntervalAndSumToRank) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = gaussian(50, 7, 300 + seed);
    const LeverageScores ls = hat_leverage(a);
    EXPECT_GE(ls.scores.minCoeff(), 0.0);
    EXPECT_LE(ls.scores.maxCoeff(), 1.0 + 1e-12);
    EXPECT_NEAR(ls.sum(), 7.0, 1e-8 * 7.0);
    EXPECT_NO_THROW(check_exact_score_range(ls));
  }
}

TEST(HatLeverage, RowPermutationEquivariance) {
  const Matrix a = gaussian(40, 5, 17);
  std::vector<Index> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(18);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pa(40, 5);
  for (Index i = 0; i < 40; ++i) pa.row(i) = a.row(perm[static_cast<std::size_t>(i)]);
  const Vector s = hat_leverage(a).scores;
  const Vector ps = hat_leverage(pa).scores;
  for (Index i = 0; i < 40; ++i) EXPECT_NEAR(ps(i), s(perm[static_cast<std::size_t>(i)]), 1e-12);
}

TEST(HatLeverage, ColumnScalingInvariance) {
  const Matrix a = gaussian(40, 4, 19);
  Vector dvec(4);
  dvec << 1e-3, -2.0, 50.0, 7.0;
  const Matrix ad = a * dvec.asDiagonal();
  EXPECT_LE((hat_leverage(ad).scores - hat_leverage(a).scores).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RecursiveLeverage, IdentityIncrementsAreUnitVectors) {
  std::vector<Vector> prefixes;
  RecursiveLeverageOptions opts;
  opts.on_prefix = [&](Index, const Vector& s) { prefixes.push_back(s); };
  const LeverageScores ls = recursive_exact_leverage(Matrix::Identity(3, 3), opts);
  EXPECT_LE((ls.scores - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_EQ(prefixes.size(), 3u);
  for (std::size_t d = 0; d < 3; ++d) {
    for (Index i = 0; i < 3; ++i) {
      EXPECT_NEAR(prefixes[d](i), i <= static_cast<Index>(d) ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(RecursiveLeverage, OrthogonalPairInPlane) {
  Matrix a(2, 2);
  a << 1, 1, 1, -1;
  std::vector<Vector> prefixes;
  RecursiveLeverageOptions opts;
  opts.on_prefix = [&](Index, const Vector& s) { prefixes.push_back(s); };
  const LeverageScores ls = recursive_exact_leverage(a, opts);
  ASSERT_EQ(prefixes.size(), 2u);
  EXPECT_NEAR(prefixes[0](0), 0.5, 1e-15);
  EXPECT_NEAR(prefixes[1](0) - prefixes[0](0), 0.5, 1e-15);
  EXPECT_LE((ls.scores - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RecursiveLeverage, MatchesHatLeverageBothModes) {
  const Matrix a = gaussian(80, 10, 23);
  const Vector want = hat_leverage(a).scores;
  for (const bool gram : {true, false}) {
    RecursiveLeverageOptions opts;
    opts.use_gram_update = gram;
    EXPECT_LE((recursive_exact_leverage(a, opts).scores - want).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(RecursiveLeverage, ScoresNonDecreasingInWidth) {
  const Matrix a = gaussian(60, 8, 29);
  Vector prev = Vector::Zero(60);
  RecursiveLeverageOptions opts;
  opts.on_prefix = [&](Index, const Vector& s) {
    EXPECT_GE((s - prev).minCoeff(), -1e-15);
    prev = s;
  };
  recursive_exact_leverage(a, opts);
}

TEST(RecursiveLeverage, ColumnInSpanIsDegenerate) {
  Matrix a = gaussian(20, 3, 31);
  a.col(2) = a.col(0) - 0.5 * a.col(1);
  for (const bool gram : {true, false}) {
    RecursiveLeverageOptions opts;
    opts.use_gram_update = gram;
    try {
      recursive_exact_leverage(a, opts);
      FAIL() << "expected DegenerateResidual";
    } catch (const NumericalError& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateResidual);
    }
  }
}

TEST(MinNormLeverage, Examples) {
  EXPECT_NEAR(min_norm_leverage(column({3, 4}), 0), 9.0 / 25.0, 1e-15);
  EXPECT_NEAR(min_norm_leverage(Matrix::Identity(3, 3), 1), 1.0, 1e-15);
}

TEST(MinNormLeverage, AgreesWithHatLeverageOnEveryRow) {
  const Matrix a = gaussian(40, 5, 37);
  const Vector want = hat_leverage(a).scores;
  for (Index i = 0; i < 40; ++i) EXPECT_NEAR(min_norm_leverage(a, i), want(i), 1e-9);
}

TEST(ToDistribution, UniformForIdentity) {
  const SamplingDistribution p = to_distribution({Vector::Ones(3), 3});
  EXPECT_FALSE(p.renormalized);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(p.probs(i), 1.0 / 3.0, 1e-16);
}

TEST(ToDistribution, BaseCaseColumn) {
  Vector s(2);
  s << 9.0 / 25.0, 16.0 / 25.0;
  const SamplingDistribution p = to_distribution({s, 1});
  EXPECT_NEAR(p.probs(0), 0.36, 1e-15);
  EXPECT_NEAR(p.probs(1), 0.64, 1e-15);
}

TEST(ToDistribution, RenormalizesWhenMassIsOff) {
  Vector s(2);
  s << 1.0, 3.0;
  const SamplingDistribution p = to_distribution({s, 2});
  EXPECT_TRUE(p.renormalized);
  EXPECT_NEAR(p.probs.sum(), 1.0, 1e-15);
  EXPECT_NEAR(p.probs(1), 0.75, 1e-15);
}

TEST(ToDistribution, ZeroWidthIsEmpty) {
  try {
    to_distribution({Vector::Ones(3), 0});
    FAIL() << "expected EmptyScores";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyScores);
  }
}

TEST(CheckExactScoreRange, FlagsOutOfRange) {
  Vector s(2);
  s << 0.5, 1.0 + 1e-6;
  EXPECT_THROW(check_exact_score_range({s, 1}), NumericalError);
  s(1) = 1.0 + 1e-11;
  EXPECT_NO_THROW(check_exact_score_range({s, 1}));
}

}  // namespace
}  // namespace salsa
