#pragma once

// Experiment harness: synthetic data generation, timed exact-vs-sketched
// comparisons and the report format shared by the CLI and the acceptance
// suite.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "salsa/arma.hpp"
#include "salsa/matrix.hpp"
#include "salsa/sketching.hpp"

namespace salsa {

struct GeneratedMatrix {
  Matrix a;
  std::vector<Index> outlier_rows;  // ascending
};

/// m x n standard Gaussian entries; `outliers` distinct rows chosen
/// uniformly get scale * Z1 / Z2 added to every entry (Z1, Z2 independent
/// standard normals, i.e. scaled Cauchy noise). Throws InvalidArgument
/// unless 0 <= outliers <= m.
GeneratedMatrix generate_matrix(Index m, Index n, Index outliers, double scale, std::uint64_t seed);

/// Seconds spent in fn, measured on a steady clock after one discarded
/// warm-up call when warm_up is set.
double time_call(const std::function<void()>& fn, bool warm_up = false);

struct RunRow {
  std::uint64_t seed = 0;
  std::size_t s1 = 0;  // resolved row sample size at the final width
  std::size_t s2 = 0;
  double wall_time_exact = 0.0;
  double wall_time_approx = 0.0;
  std::vector<double> metrics;  // one entry per ExperimentReport::metric_names
  bool clamped = false;
  bool degenerate = false;
};

struct Aggregate {
  std::size_t s1 = 0;
  std::size_t s2 = 0;
  std::size_t runs = 0;
  std::vector<double> median;  // per metric
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation; 0 for one run
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> metric_names;
  std::vector<RunRow> rows;
  std::vector<Aggregate> aggregates;

  /// Sorts rows by (seed, s1, s2) and recomputes one aggregate per (s1, s2).
  void finalize();
};

/// "# key=value" config lines, then one table with a leading kind column
/// ("run" or "aggregate"). Floating-point fields use shortest round-trip
/// formatting.
void write_report_csv(const std::filesystem::path& path, const ExperimentReport& report);
void write_report_json(const std::filesystem::path& path, const ExperimentReport& report);

/// Parses a report written by write_report_csv and checks every aggregate
/// against the run rows (relative tolerance 1e-12). Throws IoError(Parse).
ExperimentReport read_report_csv(const std::filesystem::path& path);

/// The report text with the two wall-clock columns blanked, for
/// determinism comparisons.
std::string report_without_timings(const std::filesystem::path& path);

double median_of(std::vector<double> v);

/// One grid cell of an exact-vs-sketched leverage comparison.
struct SalsaGridPoint {
  RowSamplePolicy s1;
  ColumnSamplePolicy s2;
};

struct CompareOptions {
  std::vector<SalsaGridPoint> grid;
  int reps = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  bool oracle_mode = false;
  double rank_tol = kDefaultRankTol;
  bool warm_up = true;
};

/// Exact leverage once, then reps SALSA runs per grid cell with seeds
/// derive_seed(seed, rep, Repetition). Metric: MAPE in percent.
ExperimentReport compare_leverage(const Matrix& a, const CompareOptions& opts);

struct ArmaCompareOptions {
  ArmaSpec spec;
  Index n = 200000;
  int reps = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  SketchPlan plan;          // seed is overwritten per repetition
  LsarmaOptions options;    // q is taken from spec; mode is set per fit
};

/// Per repetition: simulate with derive_seed(seed, rep, Simulation), fit at
/// the true orders in exact and sketched mode. Metrics: sketched vs exact
/// and exact vs true parameter error, in percent.
ExperimentReport compare_arma(const ArmaCompareOptions& opts);

struct LabelledFit {
  std::string label;
  FitResult fit;
};

/// Long format: label,curve,index,value with curves bic, pacf, pacf_band.
void write_curves_csv(const std::filesystem::path& path, const std::vector<LabelledFit>& fits);

/// Runs jobs 0..count-1 on up to `threads` worker threads; results must be
/// written to preassigned slots. The first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace salsa
