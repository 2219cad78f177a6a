#include "salsa/sketching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "salsa/errors.hpp"

namespace salsa {

RowSamplePolicy RowSamplePolicy::absolute(std::size_t s) {
  RowSamplePolicy p;
  p.kind = Kind::Absolute;
  p.count = s;
  return p;
}

RowSamplePolicy RowSamplePolicy::fraction(double ratio) {
  RowSamplePolicy p;
  p.kind = Kind::FractionOfRows;
  p.ratio = ratio;
  return p;
}

RowSamplePolicy RowSamplePolicy::theory(double eps, double delta, double beta, double c0) {
  RowSamplePolicy p;
  p.kind = Kind::Theory;
  p.eps = eps;
  p.delta = delta;
  p.beta = beta;
  p.c0 = c0;
  return p;
}

ColumnSamplePolicy ColumnSamplePolicy::absolute(std::size_t s) {
  ColumnSamplePolicy p;
  p.kind = Kind::Absolute;
  p.count = s;
  return p;
}

ColumnSamplePolicy ColumnSamplePolicy::theory(double eps, double delta, double beta) {
  ColumnSamplePolicy p;
  p.kind = Kind::Theory;
  p.eps = eps;
  p.delta = delta;
  p.beta = beta;
  return p;
}

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

void check_params(const char* who, double eps, double delta, double beta) {
  if (!open_unit(eps)) throw ConfigError(std::string(who) + ": eps must lie in (0, 1)");
  if (!open_unit(delta)) throw ConfigError(std::string(who) + ": delta must lie in (0, 1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError(std::string(who) + ": beta must lie in (0, 1]");
}

}  // namespace

void SketchPlan::validate() const {
  switch (s1.kind) {
    case RowSamplePolicy::Kind::Absolute:
      if (s1.count < 1) throw ConfigError("s1: count must be >= 1");
      break;
    case RowSamplePolicy::Kind::FractionOfRows:
      if (!(s1.ratio > 0.0 && s1.ratio <= 1.0)) throw ConfigError("s1: ratio must lie in (0, 1]");
      break;
    case RowSamplePolicy::Kind::Theory:
      check_params("s1", s1.eps, s1.delta, s1.beta);
      if (!(s1.c0 > 0.0)) throw ConfigError("s1: c0 must be positive");
      break;
  }
  if (s2.kind == ColumnSamplePolicy::Kind::Absolute) {
    if (s2.count < 1) throw ConfigError("s2: count must be >= 1");
  } else {
    check_params("s2", s2.eps, s2.delta, s2.beta);
  }
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw ConfigError("rank_tol must lie in (0, 1)");
}

std::optional<double> SketchPlan::eps_star() const {
  if (s1.kind != RowSamplePolicy::Kind::Theory) return std::nullopt;
  double e = s1.eps;
  if (s2.kind == ColumnSamplePolicy::Kind::Theory) e = std::max(e, s2.eps);
  return e;
}

std::size_t resolve_row_sample_size(const SketchPlan& plan, Index d, Index m, bool* clamped) {
  if (d < 1 || m <= d) {
    throw NumericalError(ErrorKind::InvalidArgument, "resolve_row_sample_size: need 1 <= d < m");
  }
  const auto& p = plan.s1;
  double raw = 0.0;
  switch (p.kind) {
    case RowSamplePolicy::Kind::Absolute:
      raw = static_cast<double>(p.count);
      break;
    case RowSamplePolicy::Kind::FractionOfRows:
      raw = std::ceil(p.ratio * static_cast<double>(m));
      break;
    case RowSamplePolicy::Kind::Theory: {
      const double dd = static_cast<double>(d);
      raw = std::ceil(p.c0 * dd * std::log(dd / p.delta) / (p.beta * p.eps * p.eps));
      break;
    }
  }
  const double lo = static_cast<double>(d + 1);
  const double hi = static_cast<double>(m);
  const double s = std::clamp(raw, lo, hi);
  if (clamped) *clamped = (s != raw);
  return static_cast<std::size_t>(s);
}

std::size_t resolve_column_sample_size(const SketchPlan& plan) {
  const auto& p = plan.s2;
  if (p.kind == ColumnSamplePolicy::Kind::Absolute) return p.count;
  const double xi = 1.0 + std::sqrt((8.0 / p.beta) * std::log(1.0 / p.delta));
  return static_cast<std::size_t>(std::ceil(xi * xi / (p.beta * p.eps * p.eps)));
}

CdfSampler::CdfSampler(const Vector& probs) : cumulative_(static_cast<std::size_t>(probs.size())) {
  if (probs.size() == 0) throw NumericalError(ErrorKind::EmptyScores, "CdfSampler: empty distribution");
  std::partial_sum(probs.data(), probs.data() + probs.size(), cumulative_.begin());
  if (!(cumulative_.back() > 0.0)) {
    throw NumericalError(ErrorKind::EmptyScores, "CdfSampler: zero total mass");
  }
}

Index CdfSampler::draw(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // u < back() so the search never runs off the end.
  return static_cast<Index>(it - cumulative_.begin());
}

RowSketch draw_row_sketch(const SamplingDistribution& dist, std::size_t s, Rng& rng) {
  if (s < 1) throw NumericalError(ErrorKind::InvalidArgument, "draw_row_sketch: s must be >= 1");
  const CdfSampler sampler(dist.probs);
  RowSketch sk;
  sk.row_indices.resize(s);
  sk.weights.resize(s);
  const double sd = static_cast<double>(s);
  for (std::size_t t = 0; t < s; ++t) {
    const Index i = sampler.draw(rng);
    sk.row_indices[t] = i;
    sk.weights[t] = 1.0 / std::sqrt(sd * dist.probs(i));
  }
  return sk;
}

namespace {

void check_indices(const RowSketch& sk, Index rows) {
  for (const Index i : sk.row_indices) {
    if (i < 0 || i >= rows) {
      throw NumericalError(ErrorKind::DimensionMismatch,
                           "row sketch index " + std::to_string(i) + " out of range");
    }
  }
}

}  // namespace

Matrix apply_row_sketch(const RowSketch& sk, MatrixRef a) {
  check_indices(sk, a.rows());
  const Index s = static_cast<Index>(sk.size());
  Matrix out(s, a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index t = 0; t < s; ++t) out(t, j) = sk.weights[t] * a(sk.row_indices[t], j);
  }
  return out;
}

Vector apply_row_sketch_vec(const RowSketch& sk, VectorRef v) {
  check_indices(sk, v.size());
  Vector out(static_cast<Index>(sk.size()));
  for (Index t = 0; t < out.size(); ++t) out(t) = sk.weights[t] * v(sk.row_indices[t]);
  return out;
}

Matrix apply_row_sketch(const RowSketch& sk, const ColumnSource& src, Index ncols) {
  check_indices(sk, src.rows());
  Matrix out;
  src.gather_rows(sk.row_indices, ncols, out);
  for (Index t = 0; t < out.rows(); ++t) out.row(t) *= sk.weights[t];
  return out;
}

Matrix basic_matrix_multiply(MatrixRef a, MatrixRef b, const SamplingDistribution& probs,
                             std::size_t c, Rng& rng) {
  if (a.cols() != b.rows() || probs.m() != a.cols()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "basic_matrix_multiply: inner dimensions");
  }
  if (c < 1) throw NumericalError(ErrorKind::InvalidArgument, "basic_matrix_multiply: c >= 1");
  const CdfSampler sampler(probs.probs);
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  const double cd = static_cast<double>(c);
  for (std::size_t t = 0; t < c; ++t) {
    const Index i = sampler.draw(rng);
    out.noalias() += (1.0 / (cd * probs.probs(i))) * a.col(i) * b.row(i);
  }
  return out;
}

SamplingDistribution product_distribution(MatrixRef a, MatrixRef b) {
  if (a.cols() != b.rows()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "product_distribution: inner dimensions");
  }
  Vector w = a.colwise().norm().transpose().cwiseProduct(b.rowwise().norm());
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericalError(ErrorKind::ZeroVector, "product_distribution: zero product");
  return SamplingDistribution{w / total, false};
}

SamplingDistribution column_sketch_distribution(VectorRef phi_hat) {
  const double norm = phi_hat.stableNorm();
  if (!(norm >= 1e-300)) throw NumericalError(ErrorKind::ZeroVector, "column_sketch_distribution");
  return SamplingDistribution{(phi_hat / norm).array().square(), false};
}

}  // namespace salsa
