#pragma once

// Run configuration files: "key = value" lines grouped under [plan],
// [experiment] and [arma] sections. '#' and ';' start comments. Unknown
// sections and keys are errors.
//
// [plan]        s1_mode = fraction | absolute | theory
//               s1 = <count>           (absolute)
//               s1_fraction = <ratio>  (fraction)
//               eps1, delta1, beta1, c0 (theory)
//               s2_mode = absolute | theory
//               s2 = <count>, eps2, delta2, beta2
//               seed, rank_tol, oracle = true | false
// [experiment]  m, n, outliers, outlier_scale, reps, threads, out, input
// [arma]        phi, theta (comma-separated), sigma2, n, pbar, q, ptilde,
//               ptilde_max, mode = exact | sketched, alpha, bonferroni

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "salsa/arma.hpp"
#include "salsa/sketching.hpp"

namespace salsa {

struct ExperimentConfig {
  Index m = 100000;
  Index n = 50;
  Index outliers = 100;
  double outlier_scale = 10.0;
  int reps = 1;
  int threads = 1;
  std::string out;
  std::string input;
};

struct ArmaConfig {
  ArmaSpec spec;
  Index n = 200000;
  LsarmaOptions options;
};

struct RunConfig {
  SketchPlan plan;
  ExperimentConfig experiment;
  ArmaConfig arma;
};

/// Throws ConfigError naming the line and key of the first problem, and
/// IoError(Open) when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Same grammar, from text; origin labels error messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Applies the SALSA_SEED environment variable, when set, to cfg.plan.seed.
/// Throws ConfigError for a value that is not an unsigned integer.
void apply_env_overrides(RunConfig& cfg);

}  // namespace salsa
