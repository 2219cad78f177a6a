#pragma once

// Persistence for matrices and series: the .smx binary format with a
// column-streaming reader, and CSV import/export.
//
// .smx layout (little-endian, 30-byte header, then the payload):
//   offset 0   8 bytes  magic "SALSAMAT"
//   offset 8   u32      version (1)
//   offset 12  u64      rows
//   offset 20  u64      cols
//   offset 28  u8       layout (0 = column-major)
//   offset 29  u8       dtype  (0 = f64)
//   offset 30  rows * cols * 8 bytes, column after column

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "salsa/column_source.hpp"
#include "salsa/matrix.hpp"

namespace salsa {

inline constexpr std::uint32_t kSmxVersion = 1;
inline constexpr std::size_t kSmxHeaderBytes = 30;

struct MatrixHeader {
  std::uint32_t version = kSmxVersion;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint8_t layout = 0;
  std::uint8_t dtype = 0;
};

/// Throws IoError(Open / Write) on filesystem failures.
void write_matrix(const std::filesystem::path& path, MatrixRef a);

/// Throws IoError(BadMagic / UnsupportedVersion / TruncatedPayload).
Matrix read_matrix(const std::filesystem::path& path);

/// Validates the header and the payload length without reading the payload.
MatrixHeader read_matrix_header(const std::filesystem::path& path);

/// File-backed column access. Columns are read on demand; nothing beyond
/// one column (or the requested rows) is held in memory. A reader is not
/// safe for concurrent use; open one per thread.
class SmxReader final : public ColumnSource {
 public:
  explicit SmxReader(const std::filesystem::path& path);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  std::span<const double> column(Index j, std::vector<double>& scratch) const override;
  void gather_rows(std::span<const Index> rows, Index ncols, Matrix& out) const override;

  /// Sequential iteration: fills col with the next column and returns true,
  /// or returns false once every column has been produced.
  bool next(Vector& col);

  /// Random access to column j; does not move the iteration cursor.
  Vector fetch(Index j) const;

 private:
  void read_at(std::uint64_t offset, double* dst, std::size_t count) const;

  std::filesystem::path path_;
  mutable std::ifstream in_;
  Index rows_ = 0;
  Index cols_ = 0;
  Index cursor_ = 0;
};

/// Opens a column iterator over an .smx file.
SmxReader stream_columns(const std::filesystem::path& path);

struct CsvOptions {
  bool header = false;  // skip (on read) or emit (on write) one header row
  char delimiter = ',';
};

/// Every record must have the same number of fields. Throws
/// IoError(Parse) naming the line and column of the first bad field.
Matrix read_csv_matrix(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Values use the shortest representation that parses back to the same
/// double. header_names, when given, must have one entry per column.
void write_csv_matrix(const std::filesystem::path& path, MatrixRef a, const CsvOptions& opts = {},
                      const std::vector<std::string>& header_names = {});

/// One value per line.
Vector read_series(const std::filesystem::path& path, const CsvOptions& opts = {});
void write_series(const std::filesystem::path& path, VectorRef x, const CsvOptions& opts = {},
                  const std::string& header_name = "x");

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

/// Parses a whole field as a double; std::nullopt on any trailing text.
std::optional<double> parse_double(std::string_view field);

}  // namespace salsa
