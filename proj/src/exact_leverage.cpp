#include "salsa/exact_leverage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "salsa/errors.hpp"

namespace salsa {

namespace {

constexpr Index kRowBlock = 1 << 15;

void check_tall(MatrixRef a, const char* who) {
  if (a.cols() < 1 || a.rows() < a.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         std::string(who) + ": need rows >= cols >= 1");
  }
}

}  // namespace

void check_exact_score_range(const LeverageScores& ls) {
  constexpr double slack = 1e-10;
  for (Index i = 0; i < ls.m(); ++i) {
    const double s = ls.scores(i);
    if (!(s >= -slack && s <= 1.0 + slack)) {
      throw NumericalError(ErrorKind::NumericalHealth,
                           "exact leverage score " + std::to_string(s) + " at row " +
                               std::to_string(i) + " outside [0, 1]");
    }
  }
}

LeverageScores hat_leverage(MatrixRef a, double rank_tol) {
  check_tall(a, "hat_leverage");
  const Index m = a.rows();
  const Index n = a.cols();

  Matrix r;
  {
    Eigen::HouseholderQR<Matrix> qr(a);
    r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  }
  const double lead = r.diagonal().cwiseAbs().maxCoeff();
  for (Index k = 0; k < n; ++k) {
    if (!(std::abs(r(k, k)) >= rank_tol * lead) || lead == 0.0) {
      throw NumericalError(ErrorKind::RankDeficient,
                           "hat_leverage: R(" + std::to_string(k) + "," + std::to_string(k) +
                               ") below tolerance");
    }
  }

  LeverageScores out{Vector(m), n};
  const auto upper = r.triangularView<Eigen::Upper>();
  Matrix block;
  for (Index start = 0; start < m; start += kRowBlock) {
    const Index len = std::min(kRowBlock, m - start);
    block = a.middleRows(start, len);
    upper.solveInPlace<Eigen::OnTheRight>(block);
    out.scores.segment(start, len) = block.rowwise().squaredNorm();
  }
  check_exact_score_range(out);
  return out;
}

LeverageScores recursive_exact_leverage(MatrixRef a, const RecursiveLeverageOptions& opts) {
  check_tall(a, "recursive_exact_leverage");
  const Index n = a.cols();

  const double norm0 = a.col(0).squaredNorm();
  if (!(norm0 > 0.0)) {
    throw NumericalError(ErrorKind::DegenerateResidual, "first column is zero");
  }
  LeverageScores out{a.col(0).array().square() / norm0, 1};
  if (opts.on_prefix) opts.on_prefix(1, out.scores);

  GramInverse gram;
  if (opts.use_gram_update) gram.inverse = Matrix::Constant(1, 1, 1.0 / norm0);

  Vector phi;
  Vector resid;
  for (Index d = 1; d < n; ++d) {
    const auto prefix = a.leftCols(d);
    const auto next = a.col(d);
    if (opts.use_gram_update) {
      phi = gram.inverse * (prefix.transpose() * next);
    } else {
      try {
        phi = ols_solve(prefix, next, opts.rank_tol);
      } catch (const NumericalError& e) {
        throw NumericalError(ErrorKind::ColinearPrefix,
                             "prefix of width " + std::to_string(d) + ": " + e.what());
      }
    }
    resid = prefix * phi - next;
    const double rnorm2 = resid.squaredNorm();
    if (!(std::sqrt(rnorm2) >= 1e-12 * next.norm())) {
      throw NumericalError(ErrorKind::DegenerateResidual,
                           "column " + std::to_string(d) + " lies in the span of its prefix");
    }
    out.scores.array() += resid.array().square() / rnorm2;
    out.d = d + 1;

    if (opts.use_gram_update && d + 1 < n) {
      try {
        gram = gram_inverse_append(gram, prefix, next);
      } catch (const NumericalError& e) {
        throw NumericalError(ErrorKind::ColinearPrefix, e.what());
      }
    }
    if (opts.on_prefix) opts.on_prefix(out.d, out.scores);
  }
  check_exact_score_range(out);
  return out;
}

double min_norm_leverage(MatrixRef a, Index i) {
  check_tall(a, "min_norm_leverage");
  if (i < 0 || i >= a.rows()) {
    throw NumericalError(ErrorKind::InvalidArgument, "min_norm_leverage: row out of range");
  }
  const Matrix gram = a.transpose() * a;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(ErrorKind::RankDeficient, "min_norm_leverage: A^T A not SPD");
  }
  const Vector y = llt.solve(a.row(i).transpose());
  const Vector z = a * y;
  return z.squaredNorm();
}

SamplingDistribution to_distribution(const LeverageScores& ls) {
  if (ls.d == 0) throw NumericalError(ErrorKind::EmptyScores, "to_distribution: d == 0");
  const double total = ls.sum();
  if (!(total > 0.0)) throw NumericalError(ErrorKind::EmptyScores, "to_distribution: zero mass");
  const double nominal = static_cast<double>(ls.d);
  SamplingDistribution dist;
  if (std::abs(total - nominal) > 1e-10) {
    dist.probs = ls.scores / total;
    dist.renormalized = true;
  } else {
    dist.probs = ls.scores / nominal;
  }
  return dist;
}

}  // namespace salsa
