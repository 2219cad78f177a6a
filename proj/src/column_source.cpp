#include "salsa/column_source.hpp"

#include <algorithm>

namespace salsa {

Matrix ColumnSource::prefix(Index ncols) const {
  Matrix out(rows(), ncols);
  std::vector<double> scratch;
  for (Index j = 0; j < ncols; ++j) {
    const auto col = column(j, scratch);
    std::copy(col.begin(), col.end(), out.col(j).data());
  }
  return out;
}

std::span<const double> MatrixColumns::column(Index j, std::vector<double>& /*scratch*/) const {
  return {a_->col(j).data(), static_cast<std::size_t>(a_->rows())};
}

void MatrixColumns::gather_rows(std::span<const Index> rows, Index ncols, Matrix& out) const {
  out.resize(static_cast<Index>(rows.size()), ncols);
  for (Index j = 0; j < ncols; ++j) {
    const double* src = a_->col(j).data();
    double* dst = out.col(j).data();
    for (std::size_t t = 0; t < rows.size(); ++t) dst[t] = src[rows[t]];
  }
}

}  // namespace salsa
