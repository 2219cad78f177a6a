#pragma once

#include <functional>

#include "salsa/matrix.hpp"

namespace salsa {

/// Per-row leverage scores of an m x d matrix (exact or approximate).
struct LeverageScores {
  Vector scores;
  Index d = 0;  // number of columns accounted for

  Index m() const noexcept { return scores.size(); }
  double sum() const { return scores.sum(); }
};

/// Discrete distribution over rows (or over an inner dimension).
struct SamplingDistribution {
  Vector probs;
  bool renormalized = false;  // true if the source did not sum to its nominal mass

  Index m() const noexcept { return probs.size(); }
};

/// Diagonal of the hat matrix A (A^T A)^{-1} A^T as squared row norms of the
/// thin Q factor. Q is recovered blockwise as A R^{-1} so the m x m
/// projector is never formed and only one m x d copy is live at a time.
LeverageScores hat_leverage(MatrixRef a, double rank_tol = kDefaultRankTol);

struct RecursiveLeverageOptions {
  /// Update (A^T A)^{-1} by block inversion instead of a fresh QR per step.
  bool use_gram_update = true;
  double rank_tol = kDefaultRankTol;
  /// Called after every prefix width d = 1..n with the scores of A(:, 0:d).
  std::function<void(Index d, const Vector& scores)> on_prefix;
};

/// Column recursion l_{d+1}(i) = l_d(i) + r_d(i)^2 / ||r_d||^2, where r_d is
/// the OLS residual of column d regressed on the first d columns.
///
/// Throws DegenerateResidual if ||r_d|| < 1e-12 ||a_d|| and ColinearPrefix if
/// an intermediate least-squares problem is rank deficient.
LeverageScores recursive_exact_leverage(MatrixRef a, const RecursiveLeverageOptions& opts = {});

/// ||z*||^2 for the minimum-norm solution of A^T z = A(i,:)^T. Independent of
/// the Q-factor route; intended as a test oracle.
double min_norm_leverage(MatrixRef a, Index i);

/// probs(i) = scores(i) / d, renormalized by the actual sum when it differs
/// from d by more than 1e-10. Throws EmptyScores when d == 0.
SamplingDistribution to_distribution(const LeverageScores& ls);

/// Exact scores must lie in [0, 1 + 1e-10]; throws NumericalHealth otherwise.
void check_exact_score_range(const LeverageScores& ls);

}  // namespace salsa
