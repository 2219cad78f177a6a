#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "salsa/column_source.hpp"
#include "salsa/exact_leverage.hpp"
#include "salsa/matrix.hpp"
#include "salsa/rng.hpp"

namespace salsa {

/// How many rows the least-squares sketch keeps at each step.
struct RowSamplePolicy {
  enum class Kind { Absolute, FractionOfRows, Theory };

  Kind kind = Kind::FractionOfRows;
  std::size_t count = 0;  // Absolute
  double ratio = 0.01;    // FractionOfRows, relative to m
  // Theory: s = c0 * d * log(d / delta) / (beta * eps^2), natural log.
  double eps = 0.5;
  double delta = 0.1;
  double beta = 1.0;
  double c0 = 4.0;

  static RowSamplePolicy absolute(std::size_t s);
  static RowSamplePolicy fraction(double ratio);
  static RowSamplePolicy theory(double eps, double delta, double beta = 1.0, double c0 = 4.0);
};

/// How many columns the residual product sketch keeps.
struct ColumnSamplePolicy {
  enum class Kind { Absolute, Theory };

  Kind kind = Kind::Absolute;
  std::size_t count = 4;
  // Theory: s2 = xi^2 / (beta * eps^2), xi = 1 + sqrt((8 / beta) log(1 / delta)).
  double eps = 0.5;
  double delta = 0.1;
  double beta = 1.0;

  static ColumnSamplePolicy absolute(std::size_t s);
  static ColumnSamplePolicy theory(double eps, double delta, double beta = 1.0);
};

/// Every sampling knob of the sequential algorithm.
struct SketchPlan {
  RowSamplePolicy s1;
  ColumnSamplePolicy s2;
  std::uint64_t seed = 0;
  double rank_tol = kDefaultRankTol;
  /// Record condition numbers and the theoretical error bound per step.
  /// Needs exact quantities; intended for small validation problems only.
  bool oracle_mode = false;

  /// Throws ConfigError unless eps, delta in (0,1), beta in (0,1] and counts >= 1.
  void validate() const;

  /// max{eps1, eps2} when the row policy is theory-driven. eps2 enters only
  /// when the column policy is theory-driven as well.
  std::optional<double> eps_star() const;
};

/// Row sample size for a prefix of width d, clamped to [d + 1, m].
std::size_t resolve_row_sample_size(const SketchPlan& plan, Index d, Index m,
                                    bool* clamped = nullptr);

std::size_t resolve_column_sample_size(const SketchPlan& plan);

/// Inverse-CDF sampler over a fixed distribution; O(log m) per draw.
class CdfSampler {
 public:
  explicit CdfSampler(const Vector& probs);

  Index draw(Rng& rng) const;
  Index size() const noexcept { return static_cast<Index>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

/// Rows drawn with replacement; row t of S A is weights[t] * A(row_indices[t], :)
/// with weights[t] = 1 / sqrt(s * pi(row_indices[t])).
struct RowSketch {
  std::vector<Index> row_indices;
  std::vector<double> weights;

  std::size_t size() const noexcept { return row_indices.size(); }
};

RowSketch draw_row_sketch(const SamplingDistribution& dist, std::size_t s, Rng& rng);

Matrix apply_row_sketch(const RowSketch& sk, MatrixRef a);
Vector apply_row_sketch_vec(const RowSketch& sk, VectorRef v);
/// Sketch of the first ncols columns of a column source.
Matrix apply_row_sketch(const RowSketch& sk, const ColumnSource& src, Index ncols);

/// Sum over c draws i_t ~ probs of A(:, i_t) B(i_t, :) / (c * probs(i_t)).
Matrix basic_matrix_multiply(MatrixRef a, MatrixRef b, const SamplingDistribution& probs,
                             std::size_t c, Rng& rng);

/// pi(i) proportional to ||A(:, i)|| * ||B(i, :)||, the variance-optimal
/// distribution for basic_matrix_multiply.
SamplingDistribution product_distribution(MatrixRef a, MatrixRef b);

/// pi(i) = phi(i)^2 / ||phi||^2. Throws ZeroVector when ||phi|| < 1e-300.
SamplingDistribution column_sketch_distribution(VectorRef phi_hat);

}  // namespace salsa
