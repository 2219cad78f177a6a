#include "salsa/matrix.hpp"

#include <cmath>
#include <string>

#include "salsa/errors.hpp"

namespace salsa {

void require_finite(MatrixRef a, std::string_view what) {
  if (!a.allFinite()) {
    throw NumericalError(ErrorKind::NumericalHealth,
                         std::string(what) + " contains NaN or infinite entries");
  }
}

namespace {

void check_r_diagonal(const Eigen::Ref<const Vector>& diag, double rank_tol) {
  const double lead = diag.cwiseAbs().maxCoeff();
  for (Index k = 0; k < diag.size(); ++k) {
    if (!(std::abs(diag(k)) >= rank_tol * lead) || lead == 0.0) {
      throw NumericalError(ErrorKind::RankDeficient,
                           "ols_solve: R(" + std::to_string(k) + "," + std::to_string(k) +
                               ") below tolerance");
    }
  }
}

}  // namespace

Vector ols_solve(MatrixRef a, VectorRef b, double rank_tol, OlsMethod method) {
  if (b.size() != a.rows()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "ols_solve: b.len != A.rows");
  }
  if (a.rows() < a.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument, "ols_solve: A must be tall");
  }
  if (a.cols() == 0) return Vector(0);

  if (method == OlsMethod::HouseholderQR) {
    Eigen::HouseholderQR<Matrix> qr(a);
    const Index n = a.cols();
    check_r_diagonal(qr.matrixQR().diagonal().head(n), rank_tol);
    Vector qtb = qr.householderQ().transpose() * b;
    return qr.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(qtb.head(n));
  }
  // With column pivoting |R(0,0)| is the largest diagonal entry.
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  check_r_diagonal(qr.matrixR().diagonal().head(a.cols()), rank_tol);
  return qr.solve(b);
}

GramInverse GramInverse::of(MatrixRef a) {
  const Matrix gram = a.transpose() * a;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(ErrorKind::RankDeficient, "GramInverse: A^T A is not positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(gram.rows(), gram.cols()));
  // Symmetrize away round-off so the SPD invariant holds exactly.
  inv = 0.5 * (inv + inv.transpose()).eval();
  return GramInverse{std::move(inv)};
}

GramInverse gram_inverse_append(const GramInverse& g, MatrixRef a, VectorRef new_col) {
  const Index d = g.dim();
  if (a.cols() != d || new_col.size() != a.rows()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "gram_inverse_append: shape mismatch");
  }
  const Vector b = a.transpose() * new_col;
  const double c = new_col.squaredNorm();
  const Vector gb = g.inverse * b;
  const double k = c - b.dot(gb);
  if (!(std::abs(k) >= 1e-12 * c)) {
    throw NumericalError(ErrorKind::NearSingularUpdate,
                         "gram_inverse_append: new column is numerically in span(A)");
  }

  Matrix out(d + 1, d + 1);
  out.topLeftCorner(d, d) = g.inverse + (gb * gb.transpose()) / k;
  out.topRightCorner(d, 1) = -gb / k;
  out.bottomLeftCorner(1, d) = -gb.transpose() / k;
  out(d, d) = 1.0 / k;
  return GramInverse{std::move(out)};
}

Vector singular_values(MatrixRef a) {
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

double condition_number(MatrixRef a) {
  if (a.cols() < 1 || a.rows() < a.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument, "condition_number: need rows >= cols >= 1");
  }
  const Vector s = singular_values(a);
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin >= 1e-14 * smax) || smax == 0.0) {
    throw NumericalError(ErrorKind::RankDeficient, "condition_number: sigma_min ~ 0");
  }
  return smax / smin;
}

double spectral_norm(MatrixRef a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

double frobenius_norm(MatrixRef a) { return a.norm(); }

double two_norm(VectorRef v) { return v.norm(); }

}  // namespace salsa
