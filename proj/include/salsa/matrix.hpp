#pragma once

// Dense storage aliases and the deterministic kernels shared by every module:
// least squares, norms, condition numbers and the incremental Gram inverse.

#include <Eigen/Dense>

#include <string_view>

namespace salsa {

/// Column-major, 64-bit real storage for data and design matrices.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Relative threshold on the diagonal of R below which a factorization is
/// treated as rank deficient.
inline constexpr double kDefaultRankTol = 1e-12;

/// Throws NumericalHealth if any entry is NaN or infinite.
void require_finite(MatrixRef a, std::string_view what);

enum class OlsMethod {
  ColumnPivotedQR,  // rank-revealing; used for every exact solve
  HouseholderQR,    // blocked, no pivoting; used for small sketched solves
};

/// Least-squares solution of min ||A x - b||.
/// Throws RankDeficient when some |R(k,k)| < rank_tol * max_j |R(j,j)|.
Vector ols_solve(MatrixRef a, VectorRef b, double rank_tol = kDefaultRankTol,
                 OlsMethod method = OlsMethod::ColumnPivotedQR);

/// (A^T A)^{-1} for a full-column-rank A.
struct GramInverse {
  Matrix inverse;

  Index dim() const noexcept { return inverse.rows(); }

  /// Direct construction through a Cholesky factorization of A^T A.
  static GramInverse of(MatrixRef a);
};

/// Gram inverse of [A | new_col] from the Gram inverse of A using the 2x2
/// block inversion formula with Schur complement k = c - b^T G b, where
/// b = A^T new_col and c = ||new_col||^2. Throws NearSingularUpdate when
/// |k| < 1e-12 * c.
GramInverse gram_inverse_append(const GramInverse& g, MatrixRef a, VectorRef new_col);

Vector singular_values(MatrixRef a);

/// sigma_max / sigma_min. Throws RankDeficient if sigma_min < 1e-14 sigma_max.
double condition_number(MatrixRef a);

double spectral_norm(MatrixRef a);
double frobenius_norm(MatrixRef a);
double two_norm(VectorRef v);

}  // namespace salsa
