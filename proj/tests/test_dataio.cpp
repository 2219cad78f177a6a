#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <unistd.h>

#include "salsa/config.hpp"
#include "salsa/dataio.hpp"
#include "salsa/errors.hpp"
#include "salsa/salsa.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace salsa;
using salsa::testing::gaussian;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("salsa_dataio_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

template <class F>
void expect_io_kind(F&& f, IoErrorKind kind) {
  try {
    f();
    ADD_FAILURE() << "no IoError thrown";
  } catch (const IoError& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

void patch_byte(const fs::path& p, std::streamoff offset, char value) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(offset);
  f.put(value);
}

}  // namespace

TEST(Smx, RoundTripIsBitwise) {
  TempDir dir;
  Matrix a = gaussian(37, 5, 11);
  a(0, 0) = -0.0;
  a(1, 0) = 0.0;
  a(2, 1) = std::numeric_limits<double>::denorm_min();
  a(3, 1) = -4.9e-310;
  a(4, 2) = std::numeric_limits<double>::max();
  a(5, 2) = std::numeric_limits<double>::lowest();
  a(6, 3) = 1e-300;
  write_matrix(dir / "a.smx", a);
  const Matrix b = read_matrix(dir / "a.smx");
  EXPECT_TRUE(bitwise_equal(a, b));
  EXPECT_TRUE(std::signbit(b(0, 0)));
  EXPECT_FALSE(std::signbit(b(1, 0)));
}

TEST(Smx, FileSizeMatchesHeaderPlusPayload) {
  TempDir dir;
  write_matrix(dir / "a.smx", gaussian(9, 4, 1));
  EXPECT_EQ(fs::file_size(dir / "a.smx"), kSmxHeaderBytes + 9 * 4 * 8);
  const MatrixHeader h = read_matrix_header(dir / "a.smx");
  EXPECT_EQ(h.version, 1u);
  EXPECT_EQ(h.rows, 9u);
  EXPECT_EQ(h.cols, 4u);
  EXPECT_EQ(h.layout, 0);
  EXPECT_EQ(h.dtype, 0);
}

TEST(Smx, HeaderBytesAreLittleEndian) {
  TempDir dir;
  write_matrix(dir / "a.smx", Matrix::Zero(3, 2));
  std::ifstream in(dir / "a.smx", std::ios::binary);
  unsigned char h[30];
  in.read(reinterpret_cast<char*>(h), 30);
  EXPECT_EQ(std::string(reinterpret_cast<char*>(h), 8), "SALSAMAT");
  EXPECT_EQ(h[8], 1);
  EXPECT_EQ(h[9] | h[10] | h[11], 0);
  EXPECT_EQ(h[12], 3);
  EXPECT_EQ(h[20], 2);
  EXPECT_EQ(h[28], 0);
  EXPECT_EQ(h[29], 0);
}

TEST(Smx, TruncatedPayloadIsRejected) {
  TempDir dir;
  write_matrix(dir / "a.smx", gaussian(10, 3, 2));
  fs::resize_file(dir / "a.smx", fs::file_size(dir / "a.smx") - 8);
  expect_io_kind([&] { read_matrix(dir / "a.smx"); }, IoErrorKind::TruncatedPayload);
  expect_io_kind([&] { SmxReader r(dir / "a.smx"); }, IoErrorKind::TruncatedPayload);
}

TEST(Smx, OversizedPayloadIsRejected) {
  TempDir dir;
  write_matrix(dir / "a.smx", gaussian(4, 2, 2));
  {
    std::ofstream out(dir / "a.smx", std::ios::binary | std::ios::app);
    out.write("12345678", 8);
  }
  expect_io_kind([&] { read_matrix(dir / "a.smx"); }, IoErrorKind::TruncatedPayload);
}

TEST(Smx, ShortHeaderIsRejected) {
  TempDir dir;
  write_text(dir / "a.smx", "SALSAMAT\x01");
  expect_io_kind([&] { read_matrix(dir / "a.smx"); }, IoErrorKind::TruncatedPayload);
}

TEST(Smx, EmptyMatrixRoundTrips) {
  TempDir dir;
  write_matrix(dir / "e.smx", Matrix(0, 0));
  EXPECT_EQ(fs::file_size(dir / "e.smx"), kSmxHeaderBytes);
  const Matrix b = read_matrix(dir / "e.smx");
  EXPECT_EQ(b.rows(), 0);
  EXPECT_EQ(b.cols(), 0);
}

TEST(Smx, BadMagicIsRejected) {
  TempDir dir;
  write_matrix(dir / "a.smx", gaussian(3, 2, 3));
  patch_byte(dir / "a.smx", 0, 'X');
  expect_io_kind([&] { read_matrix(dir / "a.smx"); }, IoErrorKind::BadMagic);
}

TEST(Smx, UnknownVersionLayoutOrDtypeIsRejected) {
  TempDir dir;
  for (const std::streamoff offset : {8, 28, 29}) {
    write_matrix(dir / "a.smx", gaussian(3, 2, 3));
    patch_byte(dir / "a.smx", offset, 2);
    expect_io_kind([&] { read_matrix(dir / "a.smx"); }, IoErrorKind::UnsupportedVersion);
  }
}

TEST(Smx, MissingFileIsOpenError) {
  TempDir dir;
  expect_io_kind([&] { read_matrix(dir / "none.smx"); }, IoErrorKind::Open);
}

TEST(SmxReader, IteratesColumnsInOrder) {
  TempDir dir;
  const Matrix a = gaussian(20, 4, 5);
  write_matrix(dir / "a.smx", a);
  SmxReader reader = stream_columns(dir / "a.smx");
  EXPECT_EQ(reader.rows(), 20);
  EXPECT_EQ(reader.cols(), 4);
  Vector col;
  Index j = 0;
  while (reader.next(col)) {
    ASSERT_LT(j, 4);
    EXPECT_EQ(col, a.col(j));
    ++j;
  }
  EXPECT_EQ(j, 4);
  EXPECT_FALSE(reader.next(col));
}

TEST(SmxReader, RandomAccessAfterIteration) {
  TempDir dir;
  const Matrix a = gaussian(15, 3, 6);
  write_matrix(dir / "a.smx", a);
  SmxReader reader(dir / "a.smx");
  Vector col;
  while (reader.next(col)) {
  }
  EXPECT_EQ(reader.fetch(1), a.col(1));
  EXPECT_EQ(reader.fetch(0), a.col(0));
  EXPECT_THROW(reader.fetch(3), NumericalError);
}

TEST(SmxReader, ZeroColumnFileYieldsNothing) {
  TempDir dir;
  write_matrix(dir / "z.smx", Matrix(5, 0));
  SmxReader reader(dir / "z.smx");
  Vector col;
  EXPECT_FALSE(reader.next(col));
}

TEST(SmxReader, GatherRowsMatchesInMemory) {
  TempDir dir;
  const Matrix a = gaussian(500, 6, 7);
  write_matrix(dir / "a.smx", a);
  SmxReader reader(dir / "a.smx");
  const std::vector<Index> few = {3, 499, 3, 0};
  Matrix out;
  reader.gather_rows(few, 4, out);
  ASSERT_EQ(out.rows(), 4);
  ASSERT_EQ(out.cols(), 4);
  for (std::size_t t = 0; t < few.size(); ++t) {
    EXPECT_EQ(out.row(static_cast<Index>(t)), a.row(few[t]).head(4));
  }
  std::vector<Index> many(200);
  for (Index t = 0; t < 200; ++t) many[static_cast<std::size_t>(t)] = (t * 7) % 500;
  reader.gather_rows(many, 6, out);
  for (Index t = 0; t < 200; ++t) EXPECT_EQ(out.row(t), a.row((t * 7) % 500));
}

TEST(SmxReader, SalsaFromFileMatchesInMemory) {
  TempDir dir;
  const Matrix a = salsa::testing::gaussian_with_heavy_rows(800, 10, 4, 5.0, 8);
  write_matrix(dir / "a.smx", a);
  SketchPlan plan;
  plan.s1 = RowSamplePolicy::absolute(100);
  plan.s2 = ColumnSamplePolicy::absolute(4);
  plan.seed = 99;
  SmxReader reader(dir / "a.smx");
  const SalsaResult from_file = salsa::salsa(reader, plan);
  const SalsaResult in_memory = salsa::salsa(a, plan);
  EXPECT_EQ(from_file.scores.scores, in_memory.scores.scores);
}

TEST(Csv, ParsesSmallMatrix) {
  TempDir dir;
  write_text(dir / "a.csv", "1.5,2\n3,4\n");
  const Matrix a = read_csv_matrix(dir / "a.csv");
  ASSERT_EQ(a.rows(), 2);
  ASSERT_EQ(a.cols(), 2);
  EXPECT_EQ(a(0, 0), 1.5);
  EXPECT_EQ(a(0, 1), 2.0);
  EXPECT_EQ(a(1, 0), 3.0);
  EXPECT_EQ(a(1, 1), 4.0);
}

TEST(Csv, HeaderRowIsSkippedOnRequest) {
  TempDir dir;
  write_text(dir / "a.csv", "x,y\n1,2\n");
  CsvOptions opts;
  opts.header = true;
  const Matrix a = read_csv_matrix(dir / "a.csv", opts);
  EXPECT_EQ(a.rows(), 1);
  expect_io_kind([&] { read_csv_matrix(dir / "a.csv"); }, IoErrorKind::Parse);
}

TEST(Csv, CustomDelimiter) {
  TempDir dir;
  write_text(dir / "a.csv", "1;2;3\n");
  CsvOptions opts;
  opts.delimiter = ';';
  EXPECT_EQ(read_csv_matrix(dir / "a.csv", opts).cols(), 3);
}

TEST(Csv, ParseErrorNamesLineAndField) {
  TempDir dir;
  write_text(dir / "a.csv", "1,2\n3,abc\n");
  try {
    read_csv_matrix(dir / "a.csv");
    FAIL() << "no error";
  } catch (const IoError& e) {
    EXPECT_EQ(e.kind(), IoErrorKind::Parse);
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":2: field 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
  }
}

TEST(Csv, RaggedRowsAreRejected) {
  TempDir dir;
  write_text(dir / "a.csv", "1,2\n3\n");
  expect_io_kind([&] { read_csv_matrix(dir / "a.csv"); }, IoErrorKind::Parse);
}

TEST(Csv, MatrixRoundTripIsExact) {
  TempDir dir;
  Matrix a = gaussian(50, 7, 12);
  a(0, 0) = -0.0;
  a(1, 1) = 5e-324;
  a(2, 2) = 1.0 / 3.0;
  write_csv_matrix(dir / "a.csv", a, {true, ','});
  CsvOptions opts;
  opts.header = true;
  EXPECT_TRUE(bitwise_equal(read_csv_matrix(dir / "a.csv", opts), a));
}

TEST(Csv, SeriesRoundTripIsExact) {
  TempDir dir;
  Rng rng(2024);
  Vector x(1000);
  for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal() * std::pow(10.0, rng.uniform() * 40 - 20);
  write_series(dir / "x.csv", x);
  const Vector y = read_series(dir / "x.csv");
  ASSERT_EQ(y.size(), x.size());
  EXPECT_EQ(std::memcmp(x.data(), y.data(), sizeof(double) * 1000), 0);
}

TEST(Csv, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(*parse_double("0.1"), 0.1);
  EXPECT_FALSE(parse_double("1.0x").has_value());
  EXPECT_FALSE(parse_double("").has_value());
}

TEST(Config, ParsesAllSections) {
  const RunConfig cfg = parse_config(
      "# comment\n"
      "[plan]\n"
      "s1_mode = absolute\n"
      "s1 = 250 ; trailing comment\n"
      "s2 = 6\n"
      "seed = 42\n"
      "oracle = true\n"
      "[experiment]\n"
      "m = 1000\n"
      "outlier_scale = 2.5\n"
      "out = results.csv\n"
      "[arma]\n"
      "phi = 0.5, -0.2\n"
      "theta = 0.3\n"
      "mode = sketched\n");
  EXPECT_EQ(cfg.plan.s1.kind, RowSamplePolicy::Kind::Absolute);
  EXPECT_EQ(cfg.plan.s1.count, 250u);
  EXPECT_EQ(cfg.plan.s2.count, 6u);
  EXPECT_EQ(cfg.plan.seed, 42u);
  EXPECT_TRUE(cfg.plan.oracle_mode);
  EXPECT_EQ(cfg.experiment.m, 1000);
  EXPECT_EQ(cfg.experiment.outlier_scale, 2.5);
  EXPECT_EQ(cfg.experiment.out, "results.csv");
  EXPECT_EQ(cfg.arma.spec.phi, (std::vector<double>{0.5, -0.2}));
  EXPECT_EQ(cfg.arma.spec.theta, (std::vector<double>{0.3}));
  EXPECT_EQ(cfg.arma.options.mode, FitMode::Sketched);
}

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig cfg = parse_config("");
  EXPECT_EQ(cfg.plan.s1.kind, RowSamplePolicy::Kind::FractionOfRows);
  EXPECT_EQ(cfg.plan.s1.ratio, 0.01);
  EXPECT_EQ(cfg.plan.s2.count, 4u);
  EXPECT_EQ(cfg.experiment.m, 100000);
  EXPECT_EQ(cfg.experiment.outliers, 100);
  EXPECT_EQ(cfg.experiment.outlier_scale, 10.0);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  try {
    parse_config("[plan]\nseed = 1\nbogus = 3\n", "run.ini");
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("run.ini:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedInputsAreRejected) {
  EXPECT_THROW(parse_config("[nope]\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[plan]\nseed\n"), ConfigError);
  EXPECT_THROW(parse_config("[plan]\nseed = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[plan\n"), ConfigError);
  EXPECT_THROW(parse_config("[plan]\ns1_mode = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("[arma]\nphi = 0.5, x\n"), ConfigError);
}

TEST(Config, MissingFileIsOpenError) {
  expect_io_kind([] { load_config("/nonexistent/salsa.ini"); }, IoErrorKind::Open);
}

TEST(Config, SeedEnvironmentOverride) {
  RunConfig cfg = parse_config("[plan]\nseed = 5\n");
  ::setenv("SALSA_SEED", "77", 1);
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.plan.seed, 77u);
  ::setenv("SALSA_SEED", "x", 1);
  EXPECT_THROW(apply_env_overrides(cfg), ConfigError);
  ::unsetenv("SALSA_SEED");
  cfg.plan.seed = 5;
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.plan.seed, 5u);
}
