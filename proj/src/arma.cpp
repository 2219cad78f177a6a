#include "salsa/arma.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "salsa/errors.hpp"
#include "salsa/salsa.hpp"

namespace salsa {

namespace {

// Stream offsets for the independent sketches of one pipeline run.
constexpr std::uint64_t kStreamPtilde = 0x1000;
constexpr std::uint64_t kStreamLongAr = 0x2000;
constexpr std::uint64_t kStreamPacf = 0x3000;
constexpr std::uint64_t kStreamRefit = 0x4000;

// Largest modulus among the reciprocal roots of 1 - c_1 z - ... - c_k z^k.
double max_reciprocal_root(const std::vector<double>& c) {
  const Index k = static_cast<Index>(c.size());
  if (k == 0) return 0.0;
  Matrix companion = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) companion(0, j) = c[static_cast<std::size_t>(j)];
  for (Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
  const Eigen::EigenSolver<Matrix> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

constexpr double kRootMargin = 1.0 + 1e-8;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Rows t = start..n-1 (0-based), column j holds x[t - 1 - j].
Matrix lag_matrix(const Vector& x, Index lags, Index start) {
  const Index rows = x.size() - start;
  Matrix out(rows, lags);
  for (Index j = 0; j < lags; ++j) out.col(j) = x.segment(start - 1 - j, rows);
  return out;
}

void check_r_rank(const Matrix& qr, Index cols, double rank_tol, const char* who) {
  const auto diag = qr.diagonal().head(cols).cwiseAbs();
  const double lead = diag.maxCoeff();
  for (Index j = 0; j < cols; ++j) {
    if (!(diag(j) >= rank_tol * lead) || lead == 0.0) {
      throw NumericalError(ErrorKind::RankDeficient, std::string(who) + ": lag design is rank deficient");
    }
  }
}

}  // namespace

bool check_causal(const std::vector<double>& phi) {
  return max_reciprocal_root(phi) * kRootMargin < 1.0;
}

bool check_invertible(const std::vector<double>& theta) {
  std::vector<double> neg(theta.size());
  std::transform(theta.begin(), theta.end(), neg.begin(), [](double t) { return -t; });
  return max_reciprocal_root(neg) * kRootMargin < 1.0;
}

void ArmaSpec::validate() const {
  for (const double v : phi) {
    if (!std::isfinite(v)) throw ConfigError("arma: phi must be finite");
  }
  for (const double v : theta) {
    if (!std::isfinite(v)) throw ConfigError("arma: theta must be finite");
  }
  if (!phi.empty() && phi.back() == 0.0) throw ConfigError("arma: phi_p must be nonzero");
  if (!theta.empty() && theta.back() == 0.0) throw ConfigError("arma: theta_q must be nonzero");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("arma: sigma2 must be positive");
  if (!check_causal(phi)) throw NumericalError(ErrorKind::NonCausal, "arma: AR polynomial has a root in the unit disk");
  if (!check_invertible(theta)) {
    throw NumericalError(ErrorKind::NonInvertible, "arma: MA polynomial has a root in the unit disk");
  }
}

Index default_burn_in(const ArmaSpec& spec) { return std::max<Index>(1000, 50 * (spec.p() + spec.q())); }

Vector simulate_arma(const ArmaSpec& spec, Index n, Rng& rng) {
  spec.validate();
  if (n < 1) throw NumericalError(ErrorKind::InvalidArgument, "simulate_arma: n must be >= 1");
  const Index burn = default_burn_in(spec);
  const Index total = burn + n;
  const double sd = std::sqrt(spec.sigma2);
  const Index p = spec.p();
  const Index q = spec.q();
  std::vector<double> x(static_cast<std::size_t>(total), 0.0);
  std::vector<double> w(static_cast<std::size_t>(total), 0.0);
  for (Index t = 0; t < total; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    w[ut] = sd * rng.normal();
    double v = w[ut];
    for (Index i = 1; i <= p && i <= t; ++i) v += spec.phi[static_cast<std::size_t>(i - 1)] * x[ut - static_cast<std::size_t>(i)];
    for (Index j = 1; j <= q && j <= t; ++j) v += spec.theta[static_cast<std::size_t>(j - 1)] * w[ut - static_cast<std::size_t>(j)];
    x[ut] = v;
  }
  return Eigen::Map<const Vector>(x.data() + burn, n);
}

LongArFit fit_long_ar(const Vector& x, Index ptilde, const SketchPlan& plan, FitMode mode,
                      std::uint64_t stream) {
  const Index n = x.size();
  if (ptilde < 0 || 2 * ptilde >= n) {
    throw NumericalError(ErrorKind::PtildeTooLarge, "fit_long_ar: need ptilde < n / 2");
  }
  require_finite(x, "fit_long_ar input");
  LongArFit fit;
  fit.w_hat = Vector::Zero(n);
  if (ptilde == 0) {
    fit.pi_hat = Vector(0);
    fit.w_hat = x;
    fit.sse = x.squaredNorm();
    return fit;
  }
  const Matrix lags = lag_matrix(x, ptilde, ptilde);
  const Vector y = x.tail(n - ptilde);
  try {
    fit.pi_hat = mode == FitMode::Exact ? ols_solve(lags, y, plan.rank_tol)
                                        : leverage_sketched_solve(lags, y, plan, stream).coef;
  } catch (const NumericalError& e) {
    if (e.kind() == ErrorKind::DegenerateResidual || e.kind() == ErrorKind::RankDeficientSketch) {
      throw NumericalError(ErrorKind::RankDeficient, std::string("fit_long_ar: ") + e.what());
    }
    throw;
  }
  const Vector resid = y - lags * fit.pi_hat;
  fit.w_hat.tail(n - ptilde) = resid;
  fit.sse = resid.squaredNorm();
  return fit;
}

double bic(double sigma2, Index k, Index n) {
  const double dn = static_cast<double>(n);
  return std::log(sigma2) + static_cast<double>(k) * std::log(dn) / dn;
}

Index default_ptilde_max(Index n) {
  if (n < 2) return 1;
  return static_cast<Index>(std::ceil(10.0 * std::log10(static_cast<double>(n))));
}

PtildeSelection select_ptilde(const Vector& x, Index ptilde_max, const SketchPlan& plan, FitMode mode,
                              std::uint64_t stream) {
  const Index n = x.size();
  if (ptilde_max < 1 || 4 * ptilde_max >= n) {
    throw NumericalError(ErrorKind::PtildeTooLarge, "select_ptilde: need 1 <= ptilde_max < n / 4");
  }
  require_finite(x, "select_ptilde input");
  const Matrix design = lag_matrix(x, ptilde_max, ptilde_max);
  const Vector y = x.tail(n - ptilde_max);
  std::vector<double> sse(static_cast<std::size_t>(ptilde_max) + 1);
  if (mode == FitMode::Exact) {
    // With an unpivoted QR of the nested designs, SSE(k) is the squared norm
    // of Q^T y beyond its first k entries.
    const Eigen::HouseholderQR<Matrix> qr(design);
    check_r_rank(qr.matrixQR(), ptilde_max, plan.rank_tol, "select_ptilde");
    const Vector qty = qr.householderQ().transpose() * y;
    sse[static_cast<std::size_t>(ptilde_max)] = qty.tail(qty.size() - ptilde_max).squaredNorm();
    for (Index k = ptilde_max - 1; k >= 0; --k) {
      sse[static_cast<std::size_t>(k)] = sse[static_cast<std::size_t>(k) + 1] + qty(k) * qty(k);
    }
  } else {
    // One leverage-sampled sketch serves every candidate order: the leading
    // k x k block of its R factor gives the sketched AR(k) coefficients, and
    // each is scored by its residual on the full series.
    SketchedSolve s;
    try {
      s = leverage_sketched_solve(design, y, plan, stream);
    } catch (const NumericalError& e) {
      if (e.kind() == ErrorKind::DegenerateResidual || e.kind() == ErrorKind::RankDeficientSketch) {
        throw NumericalError(ErrorKind::RankDeficient, std::string("select_ptilde: ") + e.what());
      }
      throw;
    }
    const Eigen::HouseholderQR<Matrix> qr(s.x_hat);
    check_r_rank(qr.matrixQR(), ptilde_max, plan.rank_tol, "select_ptilde");
    const Vector qty = qr.householderQ().transpose() * s.y_hat;
    const Matrix r = qr.matrixQR().topLeftCorner(ptilde_max, ptilde_max).triangularView<Eigen::Upper>();
    sse[0] = y.squaredNorm();
    for (Index k = 1; k <= ptilde_max; ++k) {
      const Vector c =
          r.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty.head(k));
      sse[static_cast<std::size_t>(k)] = (y - design.leftCols(k) * c).squaredNorm();
    }
  }

  PtildeSelection sel;
  double best = 0.0;
  for (Index k = 1; k <= ptilde_max; ++k) {
    const double s2 = sse[static_cast<std::size_t>(k)] / static_cast<double>(n);
    if (!(s2 > 0.0)) throw NumericalError(ErrorKind::RankDeficient, "select_ptilde: zero residual");
    const double b = bic(s2, k, n);
    sel.sigma2_curve.push_back(s2);
    sel.bic_curve.push_back(b);
    if (k == 1 || b < best) {
      best = b;
      sel.ptilde = k;
    }
  }
  return sel;
}

Design build_design(const Vector& x, const Vector& w_hat, Index p, Index q, Index ptilde) {
  if (p < 0 || q < 0 || ptilde < 0) throw NumericalError(ErrorKind::InvalidArgument, "build_design: negative order");
  if (p + q < 1) throw NumericalError(ErrorKind::InvalidArgument, "build_design: need p + q >= 1");
  if (w_hat.size() != x.size()) throw NumericalError(ErrorKind::DimensionMismatch, "build_design: w_hat length");
  const Index n = x.size();
  const Index start = std::max(q + ptilde, p);
  const Index rows = n - start;
  if (rows < p + q + 1) {
    throw NumericalError(ErrorKind::InsufficientData, "build_design: fewer than p + q + 1 usable rows");
  }
  Design d;
  d.x.resize(rows, p + q);
  for (Index j = 0; j < p; ++j) d.x.col(j) = x.segment(start - 1 - j, rows);
  for (Index j = 0; j < q; ++j) d.x.col(p + j) = w_hat.segment(start - 1 - j, rows);
  d.y = x.tail(rows);
  return d;
}

CmleFit cmle_fit(const Matrix& x, const Vector& y, Index p, Index q, Index n, const SketchPlan& plan,
                 FitMode mode, std::uint64_t stream) {
  if (x.cols() != p + q) throw NumericalError(ErrorKind::DimensionMismatch, "cmle_fit: X has p + q columns");
  if (n <= p + q) throw NumericalError(ErrorKind::InsufficientData, "cmle_fit: need n > p + q");
  CmleFit fit;
  Matrix bread;
  Matrix meat;
  if (mode == FitMode::Exact) {
    fit.exact_path = true;
    fit.psi_hat = ols_solve(x, y, plan.rank_tol);
    bread = GramInverse::of(x).inverse;
  } else {
    SketchedSolve s;
    try {
      s = leverage_sketched_solve(x, y, plan, stream);
    } catch (const NumericalError& e) {
      if (e.kind() == ErrorKind::DegenerateResidual || e.kind() == ErrorKind::RankDeficientSketch) {
        throw NumericalError(ErrorKind::RankDeficient, std::string("cmle_fit: ") + e.what());
      }
      throw;
    }
    fit.exact_path = s.exact;
    fit.psi_hat = std::move(s.coef);
    bread = GramInverse::of(s.x_hat).inverse;
    if (!s.exact) {
      const Vector e = s.x_hat * fit.psi_hat - s.y_hat;
      const Matrix scaled = s.x_hat.array().colwise() * e.array();
      meat = scaled.transpose() * scaled;
    }
  }
  const double sse = (x * fit.psi_hat - y).squaredNorm();
  fit.sigma2_hat = sse / static_cast<double>(n - p - q);
  Matrix cov = fit.sigma2_hat * bread;
  if (meat.size() > 0) cov += bread * meat * bread;
  fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

double pacf_critical_value(const LsarmaOptions& opts) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ConfigError("lsarma: alpha must lie in (0, 1)");
  const double tests = opts.bonferroni ? static_cast<double>(std::max<Index>(1, opts.pbar)) : 1.0;
  const boost::math::normal_distribution<double> z;
  return boost::math::quantile(z, 1.0 - opts.alpha / (2.0 * tests));
}

namespace {

struct Prewhitened {
  Vector centred;
  double mean = 0.0;
  Index ptilde = 0;
  std::vector<double> bic_curve;
  Vector w_hat;
};

Prewhitened prewhiten(const Vector& x, Index min_ptilde, const LsarmaOptions& opts, const SketchPlan& plan,
                      FitTimings& t) {
  if (x.size() < 8) throw NumericalError(ErrorKind::InsufficientData, "lsarma: series too short");
  require_finite(x, "lsarma input");
  Prewhitened pw;
  pw.mean = x.mean();
  pw.centred = x.array() - pw.mean;
  const Index n = x.size();

  auto t0 = std::chrono::steady_clock::now();
  if (opts.ptilde) {
    pw.ptilde = *opts.ptilde;
  } else {
    Index cap = opts.ptilde_max.value_or(default_ptilde_max(n));
    if (!opts.ptilde_max) cap = std::min(cap, (n - 1) / 4);
    const PtildeSelection sel = select_ptilde(pw.centred, cap, plan, opts.mode, kStreamPtilde);
    // An ARMA(h, q) design is collinear unless the long autoregression is
    // deeper than h.
    pw.ptilde = std::max(sel.ptilde, std::min(cap, min_ptilde));
    pw.bic_curve = sel.bic_curve;
  }
  t.ptilde_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  pw.w_hat = fit_long_ar(pw.centred, pw.ptilde, plan, opts.mode, kStreamLongAr).w_hat;
  t.prewhiten_s = seconds_since(t0);
  return pw;
}

void refit(FitResult& r, const Prewhitened& pw, const LsarmaOptions& opts, const SketchPlan& plan) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = pw.centred.size();
  if (r.p + r.q == 0) {
    r.psi_hat = Vector(0);
    r.std_errors = Vector(0);
    r.sigma2_hat = pw.centred.squaredNorm() / static_cast<double>(n);
  } else {
    const Design d = build_design(pw.centred, pw.w_hat, r.p, r.q, pw.ptilde);
    const CmleFit f = cmle_fit(d.x, d.y, r.p, r.q, n, plan, opts.mode, kStreamRefit);
    r.psi_hat = f.psi_hat;
    r.std_errors = f.std_errors;
    r.sigma2_hat = f.sigma2_hat;
  }
  r.timings.refit_s = seconds_since(t0);
}

FitResult start_result(const Prewhitened& pw, const LsarmaOptions& opts) {
  FitResult r;
  r.q = opts.q;
  r.ptilde = pw.ptilde;
  r.mean = pw.mean;
  r.bic_curve = pw.bic_curve;
  r.white_noise_band = 1.96 / std::sqrt(static_cast<double>(pw.centred.size()));
  return r;
}

}  // namespace

FitResult lsarma(const Vector& x, const LsarmaOptions& opts, const SketchPlan& plan) {
  plan.validate();
  if (opts.pbar < 1) throw ConfigError("lsarma: pbar must be >= 1");
  if (opts.q < 0) throw ConfigError("lsarma: q must be >= 0");
  const double z = pacf_critical_value(opts);

  FitTimings timings;
  const Prewhitened pw = prewhiten(x, opts.pbar + opts.q, opts, plan, timings);
  FitResult r = start_result(pw, opts);
  r.timings = timings;

  const auto t0 = std::chrono::steady_clock::now();
  const Index n = pw.centred.size();
  for (Index h = 1; h <= opts.pbar; ++h) {
    const Design d = build_design(pw.centred, pw.w_hat, h, opts.q, pw.ptilde);
    const CmleFit f = cmle_fit(d.x, d.y, h, opts.q, n, plan, opts.mode,
                               kStreamPacf + static_cast<std::uint64_t>(h));
    r.pacf_curve.push_back(f.psi_hat(h - 1));
    r.pacf_band.push_back(z * f.std_errors(h - 1));
  }
  r.timings.pacf_s = seconds_since(t0);

  r.p = 0;
  for (Index h = opts.pbar; h >= 1; --h) {
    const auto k = static_cast<std::size_t>(h - 1);
    if (std::abs(r.pacf_curve[k]) > r.pacf_band[k]) {
      r.p = h;
      break;
    }
  }
  r.order_not_identified = (r.p == 0);
  refit(r, pw, opts, plan);
  return r;
}

FitResult fit_arma(const Vector& x, Index p, const LsarmaOptions& opts, const SketchPlan& plan) {
  plan.validate();
  if (p < 0 || opts.q < 0) throw ConfigError("fit_arma: orders must be >= 0");
  FitTimings timings;
  const Prewhitened pw = prewhiten(x, p + opts.q, opts, plan, timings);
  FitResult r = start_result(pw, opts);
  r.timings = timings;
  r.p = p;
  refit(r, pw, opts, plan);
  return r;
}

double param_percentage_error(const Vector& psi, const Vector& psi_hat) {
  if (psi.size() != psi_hat.size()) {
    throw NumericalError(ErrorKind::DimensionMismatch, "param_percentage_error: lengths differ");
  }
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw NumericalError(ErrorKind::ZeroTrueVector, "param_percentage_error: ||psi|| = 0");
  return (psi - psi_hat).norm() / norm * 100.0;
}

std::vector<double> sample_acf(const Vector& x, Index max_lag) {
  const Index n = x.size();
  if (max_lag < 1 || max_lag >= n) throw NumericalError(ErrorKind::InvalidArgument, "sample_acf: need 1 <= lag < n");
  const Vector c = x.array() - x.mean();
  const double c0 = c.squaredNorm();
  if (!(c0 > 0.0)) throw NumericalError(ErrorKind::ZeroVector, "sample_acf: constant series");
  std::vector<double> acf;
  acf.reserve(static_cast<std::size_t>(max_lag));
  for (Index h = 1; h <= max_lag; ++h) acf.push_back(c.head(n - h).dot(c.tail(n - h)) / c0);
  return acf;
}

}  // namespace salsa
