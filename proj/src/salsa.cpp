#include "salsa/salsa.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "salsa/errors.hpp"

namespace salsa {

SalsaState salsa_init(const ColumnSource& src) {
  if (src.cols() < 1 || src.rows() <= src.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument, "salsa: need rows > cols >= 1");
  }
  std::vector<double> scratch;
  const auto a0 = src.column(0, scratch);
  const Eigen::Map<const Vector> col(a0.data(), static_cast<Index>(a0.size()));
  const double norm2 = col.squaredNorm();
  if (!(norm2 > 0.0)) throw NumericalError(ErrorKind::DegenerateResidual, "salsa: first column is zero");

  SalsaState state;
  state.d = 1;
  state.scores = LeverageScores{col.array().square() / norm2, 1};
  return state;
}

namespace {

Vector solve_sketched(const SalsaState& state, const ColumnSource& src, const SketchPlan& plan,
                      const Eigen::Map<const Vector>& next, std::size_t s1, StepHealth& health) {
  const Index w = state.d;
  const SamplingDistribution dist = to_distribution(state.scores);
  for (int attempt = 0;; ++attempt) {
    Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(w), StreamRole::RowSketch,
                        static_cast<std::uint64_t>(attempt)));
    const RowSketch sk = draw_row_sketch(dist, s1, rng);
    const Matrix a_hat = apply_row_sketch(sk, src, w);
    const Vector b_hat = apply_row_sketch_vec(sk, next);
    try {
      health.retries = attempt;
      return ols_solve(a_hat, b_hat, plan.rank_tol, OlsMethod::HouseholderQR);
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::RankDeficient) throw;
      if (attempt >= 1) {
        throw NumericalError(ErrorKind::RankDeficientSketch,
                             "sketched Gram singular at width " + std::to_string(w));
      }
    }
  }
}

}  // namespace

void salsa_step(SalsaState& state, const ColumnSource& src, const SketchPlan& plan) {
  const Index m = src.rows();
  const Index w = state.d;
  if (w < 1 || w >= src.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument, "salsa_step: no column left to consume");
  }
  if (state.scores.m() != m) {
    throw NumericalError(ErrorKind::DimensionMismatch, "salsa_step: state does not match source");
  }

  std::vector<double> next_scratch;
  const auto next_span = src.column(w, next_scratch);
  const Eigen::Map<const Vector> next(next_span.data(), m);

  StepHealth health;
  health.d = w;
  health.s1 = resolve_row_sample_size(plan, w, m, &health.s1_clamped);

  Vector phi_hat;
  if (health.s1 >= static_cast<std::size_t>(m)) {
    health.exact_path = true;
    phi_hat = ols_solve(src.prefix(w), next, plan.rank_tol);
  } else {
    phi_hat = solve_sketched(state, src, plan, next, health.s1, health);
  }

  // Combination coefficients of the prefix columns in A_d phi.
  std::map<Index, double> coef;
  const std::size_t s2 = resolve_column_sample_size(plan);
  health.s2 = s2;
  if (static_cast<std::size_t>(w) <= s2) {
    for (Index j = 0; j < w; ++j) {
      if (phi_hat(j) != 0.0) coef[j] = phi_hat(j);
    }
  } else if (phi_hat.stableNorm() >= 1e-300) {
    health.column_sketched = true;
    const SamplingDistribution col_dist = column_sketch_distribution(phi_hat);
    const CdfSampler sampler(col_dist.probs);
    Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(w), StreamRole::ColumnSketch));
    const double sd = static_cast<double>(s2);
    for (std::size_t t = 0; t < s2; ++t) {
      const Index j = sampler.draw(rng);
      coef[j] += phi_hat(j) / (sd * col_dist.probs(j));
    }
  }

  Vector resid = -next;
  std::vector<double> scratch;
  for (const auto& [j, c] : coef) {
    const auto col = src.column(j, scratch);
    resid += c * Eigen::Map<const Vector>(col.data(), m);
  }

  const double rnorm2 = resid.squaredNorm();
  health.residual_norm = std::sqrt(rnorm2);
  if (!(health.residual_norm >= 1e-12 * next.norm())) {
    health.degenerate = true;
    state.scores.scores.array() += 1.0 / static_cast<double>(m);
  } else {
    state.scores.scores.array() += resid.array().square() / rnorm2;
  }

  state.d = w + 1;
  state.scores.d = w + 1;
  state.last_phi_hat = std::move(phi_hat);
  state.last_residual = std::move(resid);
  state.health.push_back(health);
}

namespace {

StepDiagnostics oracle_step(const ColumnSource& src, const SketchPlan& plan, const SalsaState& after) {
  StepDiagnostics diag;
  const Index d = after.d;
  diag.d = d;
  const Matrix full = src.prefix(d);
  const auto prefix = full.leftCols(d - 1);
  const auto appended = full.col(d - 1);

  diag.kappa_prefix = condition_number(prefix);
  diag.kappa = condition_number(full);
  const Vector phi = ols_solve(prefix, appended, plan.rank_tol);
  diag.zeta = (prefix * phi).norm() / appended.norm();
  diag.eta = diag.zeta > 0.0
                 ? diag.kappa_prefix * std::sqrt(std::max(0.0, 1.0 / (diag.zeta * diag.zeta) - 1.0))
                 : std::numeric_limits<double>::infinity();
  diag.xi = 1.0 + 2.0 * diag.kappa_prefix * std::sqrt(static_cast<double>(d - 1));
  if (const auto eps = plan.eps_star()) {
    diag.bound = theoretical_error_bound({diag.kappa_prefix, diag.kappa, diag.eta, d, *eps});
  }

  const LeverageScores exact = hat_leverage(full, plan.rank_tol);
  double worst = 0.0;
  for (Index i = 0; i < exact.m(); ++i) {
    if (exact.scores(i) < 1e-300) continue;
    worst = std::max(worst, std::abs(exact.scores(i) - after.scores.scores(i)) / exact.scores(i));
  }
  diag.observed_max_rel_error = worst;
  return diag;
}

}  // namespace

SalsaResult salsa(const ColumnSource& src, const SketchPlan& plan) {
  plan.validate();
  SalsaState state = salsa_init(src);
  SalsaResult result;
  while (state.d < src.cols()) {
    salsa_step(state, src, plan);
    if (plan.oracle_mode) result.diagnostics.steps.push_back(oracle_step(src, plan, state));
  }
  result.scores = std::move(state.scores);
  result.health = std::move(state.health);
  return result;
}

SalsaResult salsa(const Matrix& a, const SketchPlan& plan) {
  const MatrixColumns src(a);
  return salsa(src, plan);
}

SketchedSolve leverage_sketched_solve(const Matrix& x, const Vector& y, const SketchPlan& plan,
                                      std::uint64_t stream) {
  if (y.size() != x.rows()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "leverage_sketched_solve: y.len != X.rows");
  }
  SketchPlan sub = plan;
  sub.seed = derive_seed(plan.seed, stream, StreamRole::FinalSketch);
  sub.oracle_mode = false;

  SketchedSolve out;
  const Index m = x.rows();
  const Index d = x.cols();
  const std::size_t s = resolve_row_sample_size(sub, d, m);
  if (s >= static_cast<std::size_t>(m)) {
    out.exact = true;
    out.coef = ols_solve(x, y, plan.rank_tol);
    out.x_hat = x;
    out.y_hat = y;
    return out;
  }
  out.scores = salsa(x, sub).scores;
  const SamplingDistribution dist = to_distribution(out.scores);
  for (int attempt = 0;; ++attempt) {
    Rng rng(derive_seed(sub.seed, static_cast<std::uint64_t>(d), StreamRole::FinalSketch,
                        static_cast<std::uint64_t>(attempt)));
    out.sketch = draw_row_sketch(dist, s, rng);
    out.x_hat = apply_row_sketch(out.sketch, x);
    out.y_hat = apply_row_sketch_vec(out.sketch, y);
    try {
      out.coef = ols_solve(out.x_hat, out.y_hat, plan.rank_tol, OlsMethod::HouseholderQR);
      return out;
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::RankDeficient) throw;
      if (attempt >= 1) {
        throw NumericalError(ErrorKind::RankDeficientSketch, "leverage_sketched_solve: singular sketch");
      }
    }
  }
}

double theoretical_error_bound(const ErrorBoundInputs& in) {
  if (in.d <= 1) return 0.0;
  const double dm1 = static_cast<double>(in.d - 1);
  const double xi = 1.0 + 2.0 * in.kappa_prefix * std::sqrt(dm1);
  return (std::sqrt(xi) + 5.0 * (in.eta + 2.0) * in.kappa * in.kappa) * dm1 * std::sqrt(in.eps_star);
}

double mape(const LeverageScores& exact, const LeverageScores& approx) {
  if (exact.m() != approx.m()) throw NumericalError(ErrorKind::DimensionMismatch, "mape: sizes differ");
  if (exact.m() == 0) throw NumericalError(ErrorKind::EmptyScores, "mape: empty");
  double total = 0.0;
  for (Index i = 0; i < exact.m(); ++i) {
    const double l = exact.scores(i);
    if (!(l >= 1e-300)) {
      throw NumericalError(ErrorKind::ZeroExactScore, "mape: exact score at row " + std::to_string(i));
    }
    total += std::abs(l - approx.scores(i)) / l;
  }
  return total / static_cast<double>(exact.m()) * 100.0;
}

}  // namespace salsa
