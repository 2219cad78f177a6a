#include "salsa/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>
#include <sstream>
#include <system_error>

#include "salsa/errors.hpp"

namespace salsa {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'L', 'S', 'A', 'M', 'A', 'T'};

template <class T>
void put_le(unsigned char* dst, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

template <class T>
T get_le(const unsigned char* src) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(src[i]) << (8 * i);
  return v;
}

void to_little_endian(double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(data + i, &bits, 8);
    }
  } else {
    (void)data;
    (void)count;
  }
}

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open " + describe(path) + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Open, "cannot open " + describe(path) + " for writing");
  return out;
}

MatrixHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, kSmxHeaderBytes> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < kMagic.size() || std::memcmp(raw.data(), kMagic.data(), kMagic.size()) != 0) {
    throw IoError(IoErrorKind::BadMagic, describe(path) + " is not an .smx file");
  }
  if (got < raw.size()) throw IoError(IoErrorKind::TruncatedPayload, describe(path) + ": header is truncated");
  MatrixHeader h;
  h.version = get_le<std::uint32_t>(raw.data() + 8);
  h.rows = get_le<std::uint64_t>(raw.data() + 12);
  h.cols = get_le<std::uint64_t>(raw.data() + 20);
  h.layout = raw[28];
  h.dtype = raw[29];
  if (h.version != kSmxVersion) {
    throw IoError(IoErrorKind::UnsupportedVersion,
                  describe(path) + ": version " + std::to_string(h.version) + " is not supported");
  }
  if (h.layout != 0 || h.dtype != 0) {
    throw IoError(IoErrorKind::UnsupportedVersion,
                  describe(path) + ": only column-major f64 payloads are supported");
  }
  return h;
}

std::uint64_t payload_bytes(const MatrixHeader& h, const std::filesystem::path& path) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 8;
  if (h.rows != 0 && h.cols > limit / h.rows) {
    throw IoError(IoErrorKind::TruncatedPayload, describe(path) + ": header dimensions overflow");
  }
  return h.rows * h.cols * 8;
}

MatrixHeader checked_header(std::ifstream& in, const std::filesystem::path& path) {
  const MatrixHeader h = parse_header(in, path);
  const std::uint64_t want = payload_bytes(h, path);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError(IoErrorKind::Open, "cannot stat " + describe(path));
  if (size != kSmxHeaderBytes + want) {
    throw IoError(IoErrorKind::TruncatedPayload, describe(path) + ": payload is " +
                                                     std::to_string(size - kSmxHeaderBytes) + " bytes, header implies " +
                                                     std::to_string(want));
  }
  return h;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, MatrixRef a) {
  std::ofstream out = open_out(path, std::ios::binary);
  std::array<unsigned char, kSmxHeaderBytes> raw{};
  std::memcpy(raw.data(), kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(raw.data() + 8, kSmxVersion);
  put_le<std::uint64_t>(raw.data() + 12, static_cast<std::uint64_t>(a.rows()));
  put_le<std::uint64_t>(raw.data() + 20, static_cast<std::uint64_t>(a.cols()));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));

  std::vector<double> buf(static_cast<std::size_t>(a.rows()));
  for (Index j = 0; j < a.cols(); ++j) {
    Eigen::Map<Vector>(buf.data(), a.rows()) = a.col(j);
    to_little_endian(buf.data(), buf.size());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
  }
  out.flush();
  if (!out) throw IoError(IoErrorKind::Write, "failed writing " + describe(path));
}

MatrixHeader read_matrix_header(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return checked_header(in, path);
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  const MatrixHeader h = checked_header(in, path);
  Matrix a(static_cast<Index>(h.rows), static_cast<Index>(h.cols));
  if (a.size() > 0) {
    in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * 8));
    if (in.gcount() != static_cast<std::streamsize>(a.size() * 8)) {
      throw IoError(IoErrorKind::TruncatedPayload, describe(path) + ": short read");
    }
    to_little_endian(a.data(), static_cast<std::size_t>(a.size()));
  }
  return a;
}

SmxReader::SmxReader(const std::filesystem::path& path) : path_(path), in_(open_in(path)) {
  const MatrixHeader h = checked_header(in_, path);
  rows_ = static_cast<Index>(h.rows);
  cols_ = static_cast<Index>(h.cols);
}

void SmxReader::read_at(std::uint64_t offset, double* dst, std::size_t count) const {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kSmxHeaderBytes + offset));
  in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * 8));
  if (in_.gcount() != static_cast<std::streamsize>(count * 8)) {
    throw IoError(IoErrorKind::TruncatedPayload, describe(path_) + ": short read");
  }
  to_little_endian(dst, count);
}

std::span<const double> SmxReader::column(Index j, std::vector<double>& scratch) const {
  if (j < 0 || j >= cols_) throw NumericalError(ErrorKind::InvalidArgument, "SmxReader: column out of range");
  scratch.resize(static_cast<std::size_t>(rows_));
  read_at(static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(rows_) * 8, scratch.data(), scratch.size());
  return {scratch.data(), scratch.size()};
}

void SmxReader::gather_rows(std::span<const Index> rows, Index ncols, Matrix& out) const {
  if (ncols < 0 || ncols > cols_) throw NumericalError(ErrorKind::InvalidArgument, "SmxReader: ncols out of range");
  out.resize(static_cast<Index>(rows.size()), ncols);
  const bool sparse = rows.size() * 64 < static_cast<std::size_t>(rows_);
  std::vector<double> scratch;
  for (Index j = 0; j < ncols; ++j) {
    const std::uint64_t base = static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(rows_) * 8;
    if (sparse) {
      for (std::size_t t = 0; t < rows.size(); ++t) {
        double v;
        read_at(base + static_cast<std::uint64_t>(rows[t]) * 8, &v, 1);
        out(static_cast<Index>(t), j) = v;
      }
    } else {
      const auto col = column(j, scratch);
      for (std::size_t t = 0; t < rows.size(); ++t) out(static_cast<Index>(t), j) = col[static_cast<std::size_t>(rows[t])];
    }
  }
}

bool SmxReader::next(Vector& col) {
  if (cursor_ >= cols_) return false;
  col = fetch(cursor_++);
  return true;
}

Vector SmxReader::fetch(Index j) const {
  std::vector<double> scratch;
  const auto c = column(j, scratch);
  return Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size()));
}

SmxReader stream_columns(const std::filesystem::path& path) { return SmxReader(path); }

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rows of a delimited numeric file, with the header skipped when requested.
std::vector<std::vector<double>> parse_records(const std::filesystem::path& path, const CsvOptions& opts) {
  const std::string text = read_text(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_pending = opts.header;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (blank(line)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split(line, opts.delimiter);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) {
        throw IoError(IoErrorKind::Parse, describe(path) + ":" + std::to_string(line_no) + ": field " +
                                               std::to_string(k + 1) + " '" + std::string(fields[k]) +
                                               "' is not a number");
      }
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(IoErrorKind::Parse, describe(path) + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(rows.front().size()) + " fields, found " +
                                             std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError(IoErrorKind::Write, "failed writing " + describe(path));
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path, const CsvOptions& opts) {
  const auto rows = parse_records(path, opts);
  const Index m = static_cast<Index>(rows.size());
  const Index n = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return a;
}

void write_csv_matrix(const std::filesystem::path& path, MatrixRef a, const CsvOptions& opts,
                      const std::vector<std::string>& header_names) {
  if (!header_names.empty() && static_cast<Index>(header_names.size()) != a.cols()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "write_csv_matrix: one header name per column");
  }
  std::ofstream out = open_out(path, std::ios::out);
  if (opts.header) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << opts.delimiter;
      out << (header_names.empty() ? "c" + std::to_string(j) : header_names[static_cast<std::size_t>(j)]);
    }
    out << '\n';
  }
  std::string line;
  for (Index i = 0; i < a.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) line += opts.delimiter;
      line += format_double(a(i, j));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

Vector read_series(const std::filesystem::path& path, const CsvOptions& opts) {
  const auto rows = parse_records(path, opts);
  if (!rows.empty() && rows.front().size() != 1) {
    throw IoError(IoErrorKind::Parse, describe(path) + ": a series file has one value per line");
  }
  Vector x(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x(static_cast<Index>(i)) = rows[i][0];
  return x;
}

void write_series(const std::filesystem::path& path, VectorRef x, const CsvOptions& opts,
                  const std::string& header_name) {
  std::ofstream out = open_out(path, std::ios::out);
  if (opts.header) out << header_name << '\n';
  for (Index i = 0; i < x.size(); ++i) out << format_double(x(i)) << '\n';
  finish(out, path);
}

}  // namespace salsa
