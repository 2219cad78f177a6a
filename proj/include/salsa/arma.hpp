#pragma once

// ARMA(p, q) simulation and the sketched conditional-least-squares pipeline:
// a long autoregression estimates the unobserved noise, BIC picks its order,
// lagged values and estimated noises form the regression design, and the
// AR order is read off the last AR coefficient of a sequence of fits.
//
// Sign convention: X_t = sum_i phi_i X_{t-i} + W_t + sum_j theta_j W_{t-j}.

#include <cstdint>
#include <optional>
#include <vector>

#include "salsa/matrix.hpp"
#include "salsa/rng.hpp"
#include "salsa/sketching.hpp"

namespace salsa {

struct ArmaSpec {
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 1.0;

  Index p() const noexcept { return static_cast<Index>(phi.size()); }
  Index q() const noexcept { return static_cast<Index>(theta.size()); }

  /// Throws ConfigError for a zero leading coefficient or sigma2 <= 0, and
  /// NumericalError(NonCausal / NonInvertible) for roots on or inside the
  /// unit circle.
  void validate() const;
};

/// All roots of 1 - phi_1 z - ... - phi_p z^p satisfy |z| > 1 + 1e-8.
bool check_causal(const std::vector<double>& phi);

/// All roots of 1 + theta_1 z + ... + theta_q z^q satisfy |z| > 1 + 1e-8.
bool check_invertible(const std::vector<double>& theta);

/// max(1000, 50 (p + q)).
Index default_burn_in(const ArmaSpec& spec);

/// n values after discarding default_burn_in(spec) warm-up samples; the
/// recursion starts from zeros.
Vector simulate_arma(const ArmaSpec& spec, Index n, Rng& rng);

enum class FitMode { Exact, Sketched };

struct LongArFit {
  Vector pi_hat;  // AR(ptilde) coefficients, lag 1 first
  Vector w_hat;   // length n; zero for the first ptilde entries
  double sse = 0.0;
};

/// OLS of x_t on (x_{t-1}, ..., x_{t-ptilde}) over t = ptilde+1..n. Throws
/// PtildeTooLarge unless ptilde < n / 2 and RankDeficient for a constant
/// series.
LongArFit fit_long_ar(const Vector& x, Index ptilde, const SketchPlan& plan, FitMode mode,
                      std::uint64_t stream = 0);

/// log(sigma2) + k log(n) / n.
double bic(double sigma2, Index k, Index n);

struct PtildeSelection {
  Index ptilde = 0;
  std::vector<double> bic_curve;     // entry k-1 is BIC(k)
  std::vector<double> sigma2_curve;  // entry k-1 is SSE(k) / n
};

/// Arg-min of BIC(k) over k = 1..ptilde_max (smallest k on ties). Every
/// candidate is fitted on the common rows t = ptilde_max+1..n from one QR
/// factorization, so in exact mode SSE(k) is non-increasing in k. In
/// sketched mode the factorization is of one leverage-sampled sketch and
/// SSE(k) is the full-data residual of the sketched AR(k) coefficients.
/// Throws PtildeTooLarge unless ptilde_max < n / 4.
PtildeSelection select_ptilde(const Vector& x, Index ptilde_max, const SketchPlan& plan, FitMode mode,
                              std::uint64_t stream = 0);

/// ceil(10 log10 n).
Index default_ptilde_max(Index n);

struct Design {
  Matrix x;
  Vector y;
};

/// Rows for t = s+1..n (1-based) with s = max(q + ptilde, p): regressors
/// (x_{t-1}, ..., x_{t-p}, w_{t-1}, ..., w_{t-q}), response x_t. Throws
/// InvalidArgument when p + q == 0 and InsufficientData when fewer than
/// p + q + 1 rows remain.
Design build_design(const Vector& x, const Vector& w_hat, Index p, Index q, Index ptilde);

struct CmleFit {
  Vector psi_hat;     // phi_hat then theta_hat
  double sigma2_hat;  // ||X psi - y||^2 / (n - p - q)
  Vector std_errors;  // per coefficient; includes sketch variance in sketched mode
  bool exact_path = false;
};

/// n is the series length entering the variance denominator. In sketched
/// mode the standard errors add the HC0 sandwich of the sketched rows to the
/// OLS variance.
CmleFit cmle_fit(const Matrix& x, const Vector& y, Index p, Index q, Index n, const SketchPlan& plan,
                 FitMode mode, std::uint64_t stream = 0);

struct LsarmaOptions {
  Index pbar = 1;
  Index q = 0;
  // The BIC choice is raised to pbar + q (for the PACF scan) or p + q (for
  // fixed orders) so the design never has collinear columns.
  std::optional<Index> ptilde;      // skip the BIC search
  std::optional<Index> ptilde_max;  // default_ptilde_max(n) capped below n / 4
  FitMode mode = FitMode::Sketched;
  double alpha = 0.05;     // family-wise level of the PACF cut-off
  bool bonferroni = true;  // split alpha across the pbar tests
};

struct FitTimings {
  double ptilde_s = 0.0;
  double prewhiten_s = 0.0;
  double pacf_s = 0.0;
  double refit_s = 0.0;
};

struct FitResult {
  Index p = 0;
  Index q = 0;
  Vector psi_hat;
  double sigma2_hat = 0.0;
  Vector std_errors;
  Index ptilde = 0;
  double mean = 0.0;
  std::vector<double> bic_curve;
  std::vector<double> pacf_curve;  // entry h-1 is PACF_h
  std::vector<double> pacf_band;   // entry h-1 is the cut-off for PACF_h
  double white_noise_band = 0.0;   // 1.96 / sqrt(n), reported for plotting
  bool order_not_identified = false;
  FitTimings timings;
};

/// Normal quantile used for the PACF cut-off.
double pacf_critical_value(const LsarmaOptions& opts);

/// Full pipeline: centre, choose ptilde, prewhiten, PACF scan over
/// h = 1..pbar, choose p as the largest h with |PACF_h| above its band, refit.
FitResult lsarma(const Vector& x, const LsarmaOptions& opts, const SketchPlan& plan);

/// Centre, prewhiten and fit ARMA(p, q) at the given orders; no PACF scan.
FitResult fit_arma(const Vector& x, Index p, const LsarmaOptions& opts, const SketchPlan& plan);

/// ||psi - psi_hat|| / ||psi|| * 100. Throws ZeroTrueVector for psi = 0.
double param_percentage_error(const Vector& psi, const Vector& psi_hat);

/// Sample autocorrelations at lags 1..max_lag of the mean-centred series.
std::vector<double> sample_acf(const Vector& x, Index max_lag);

}  // namespace salsa
