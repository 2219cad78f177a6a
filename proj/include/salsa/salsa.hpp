#pragma once

// Sequential approximate leverage scores.
//
// Starting from l_1(i) = a_0(i)^2 / ||a_0||^2, each step regresses the next
// column a_d on the prefix A_d using a leverage-sampled row sketch of size s1,
// forms the residual r = A_d phi_hat - a_d (through an s2-column sampled
// product once d > s2), and adds r(i)^2 / ||r||^2 to every row's score. The
// increment always carries unit mass, so the scores of an m x n matrix sum
// to n.

#include <cstddef>
#include <optional>
#include <vector>

#include "salsa/column_source.hpp"
#include "salsa/exact_leverage.hpp"
#include "salsa/sketching.hpp"

namespace salsa {

/// Bookkeeping for one step (prefix width d, new column index d).
struct StepHealth {
  Index d = 0;
  std::size_t s1 = 0;
  bool s1_clamped = false;
  bool exact_path = false;      // s1 >= m: full least squares, no row sketch
  bool column_sketched = false;  // d > s2: residual from the sampled product
  std::size_t s2 = 0;
  double residual_norm = 0.0;
  bool degenerate = false;  // increment replaced by uniform 1/m mass
  int retries = 0;          // fresh row sketches drawn after a singular one
};

struct SalsaState {
  Index d = 0;
  LeverageScores scores;
  Vector last_phi_hat;
  Vector last_residual;
  std::vector<StepHealth> health;
};

/// Per-step oracle quantities; produced only when plan.oracle_mode is set.
struct StepDiagnostics {
  Index d = 0;                   // prefix width after the step
  double kappa_prefix = 0.0;     // condition number of A(:, 0:d-1)
  double kappa = 0.0;            // condition number of A(:, 0:d)
  double zeta = 0.0;             // ||H a|| / ||a|| for the appended column
  double eta = 0.0;              // kappa_prefix * sqrt(zeta^-2 - 1)
  double xi = 0.0;               // 1 + 2 kappa_prefix sqrt(d - 1)
  std::optional<double> bound;   // empty when eps* is undefined for the plan
  double observed_max_rel_error = 0.0;
};

struct SalsaDiagnostics {
  std::vector<StepDiagnostics> steps;
};

struct SalsaResult {
  LeverageScores scores;
  SalsaDiagnostics diagnostics;
  std::vector<StepHealth> health;
};

/// State after the first column: the exact base case.
SalsaState salsa_init(const ColumnSource& src);

/// Consumes column state.d of src. Row and column streams are derived from
/// (plan.seed, state.d), so a step is reproducible in isolation.
///
/// Throws RankDeficientSketch if the sketched least-squares problem is
/// singular twice in a row.
void salsa_step(SalsaState& state, const ColumnSource& src, const SketchPlan& plan);

SalsaResult salsa(const ColumnSource& src, const SketchPlan& plan);
SalsaResult salsa(const Matrix& a, const SketchPlan& plan);

/// Least squares min ||X c - y|| solved on a row sketch drawn from the
/// SALSA scores of X. The row count follows plan.s1 at width X.cols(); when
/// it reaches X.rows() the full problem is solved instead.
struct SketchedSolve {
  Vector coef;
  LeverageScores scores;
  RowSketch sketch;  // empty on the exact path
  Matrix x_hat;      // sketched design (the full X on the exact path)
  Vector y_hat;
  bool exact = false;
};

/// All randomness is derived from (plan.seed, stream).
SketchedSolve leverage_sketched_solve(const Matrix& x, const Vector& y, const SketchPlan& plan,
                                      std::uint64_t stream);

struct ErrorBoundInputs {
  double kappa_prefix = 1.0;  // kappa(A_{m,d-1})
  double kappa = 1.0;         // kappa(A_{m,d})
  double eta = 0.0;           // eta_{m,d-1}
  Index d = 1;
  double eps_star = 0.5;
};

/// (sqrt(xi) + 5 (eta + 2) kappa^2) (d - 1) sqrt(eps*), xi = 1 + 2 kappa_prefix sqrt(d - 1).
double theoretical_error_bound(const ErrorBoundInputs& in);

/// Mean absolute percentage error, in percent. Throws ZeroExactScore if an
/// exact score is (numerically) zero.
double mape(const LeverageScores& exact, const LeverageScores& approx);

}  // namespace salsa
