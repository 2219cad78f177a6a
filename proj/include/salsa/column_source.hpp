#pragma once

#include <span>
#include <vector>

#include "salsa/matrix.hpp"

namespace salsa {

/// Column-at-a-time access to a tall matrix. The sequential leverage
/// algorithm only ever touches the prefix it has already consumed, plus
/// sampled rows and sampled columns of that prefix.
class ColumnSource {
 public:
  virtual ~ColumnSource() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// Column j. Implementations backed by memory return a view and leave
  /// scratch untouched; others fill scratch and return a view of it.
  virtual std::span<const double> column(Index j, std::vector<double>& scratch) const = 0;

  /// out(t, j) = A(rows[t], j) for j in [0, ncols).
  virtual void gather_rows(std::span<const Index> rows, Index ncols, Matrix& out) const = 0;

  /// The leading ncols columns as a dense matrix.
  Matrix prefix(Index ncols) const;
};

/// Non-owning view of an in-memory matrix.
class MatrixColumns final : public ColumnSource {
 public:
  explicit MatrixColumns(const Matrix& a) : a_(&a) {}

  Index rows() const override { return a_->rows(); }
  Index cols() const override { return a_->cols(); }
  std::span<const double> column(Index j, std::vector<double>& scratch) const override;
  void gather_rows(std::span<const Index> rows, Index ncols, Matrix& out) const override;

 private:
  const Matrix* a_;
};

}  // namespace salsa
