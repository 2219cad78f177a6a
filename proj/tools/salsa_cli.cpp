// salsa-bench: data generation, leverage scores and ARMA fitting from the
// command line. Exit codes: 0 success, 2 configuration error, 3 numerical
// error, 4 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "salsa/arma.hpp"
#include "salsa/bench.hpp"
#include "salsa/config.hpp"
#include "salsa/dataio.hpp"
#include "salsa/errors.hpp"
#include "salsa/exact_leverage.hpp"
#include "salsa/salsa.hpp"

namespace fs = std::filesystem;
using namespace salsa;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string in;
};

struct PlanFlags {
  std::optional<std::string> s1_mode;
  std::optional<std::size_t> s1;
  std::optional<double> s1_fraction;
  std::optional<double> eps1, delta1, beta1, c0;
  std::optional<std::string> s2_mode;
  std::optional<std::size_t> s2;
  std::optional<double> eps2, delta2, beta2;
  bool oracle = false;
};

struct ArmaFlags {
  std::optional<std::vector<double>> phi;
  std::optional<std::vector<double>> theta;
  std::optional<double> sigma2;
  std::optional<Index> n;
  std::optional<std::string> mode;
  std::optional<Index> ptilde;
  std::optional<Index> ptilde_max;
  std::optional<double> alpha;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed (SALSA_SEED overrides)");
  cmd->add_option("--config", c.config, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output path");
  cmd->add_option("--reps", c.reps, "Repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
}

void add_plan(CLI::App* cmd, PlanFlags& p) {
  cmd->add_option("--s1-mode", p.s1_mode, "Row sample policy")
      ->check(CLI::IsMember({"fraction", "absolute", "theory"}));
  cmd->add_option("--s1", p.s1, "Row sample size (absolute mode)");
  cmd->add_option("--s1-fraction", p.s1_fraction, "Row sample size as a fraction of m");
  cmd->add_option("--eps1", p.eps1, "Theory mode accuracy for s1");
  cmd->add_option("--delta1", p.delta1, "Theory mode failure probability for s1");
  cmd->add_option("--beta1", p.beta1, "Theory mode sampling quality for s1");
  cmd->add_option("--c0", p.c0, "Theory mode constant for s1");
  cmd->add_option("--s2-mode", p.s2_mode, "Column sample policy")->check(CLI::IsMember({"absolute", "theory"}));
  cmd->add_option("--s2", p.s2, "Column sample size (absolute mode)");
  cmd->add_option("--eps2", p.eps2, "Theory mode accuracy for s2");
  cmd->add_option("--delta2", p.delta2, "Theory mode failure probability for s2");
  cmd->add_option("--beta2", p.beta2, "Theory mode sampling quality for s2");
  cmd->add_flag("--oracle", p.oracle, "Record per-step condition numbers and error bounds");
}

void add_arma(CLI::App* cmd, ArmaFlags& a) {
  cmd->add_option("--phi", a.phi, "AR coefficients")->delimiter(',');
  cmd->add_option("--theta", a.theta, "MA coefficients")->delimiter(',');
  cmd->add_option("--sigma2", a.sigma2, "White-noise variance");
  cmd->add_option("--n", a.n, "Series length");
  cmd->add_option("--mode", a.mode, "Fit mode")->check(CLI::IsMember({"exact", "sketched"}));
  cmd->add_option("--ptilde", a.ptilde, "Fixed long-AR order");
  cmd->add_option("--ptilde-max", a.ptilde_max, "Largest long-AR order tried by BIC");
  cmd->add_option("--alpha", a.alpha, "Family-wise level of the PACF cut-off");
}

template <class T, class U>
void set_if(const std::optional<T>& v, U& dst) {
  if (v) dst = *v;
}

// Defaults, then the config file, then explicit flags, then SALSA_SEED.
RunConfig resolve(const Common& c, const PlanFlags* p, const ArmaFlags* a) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  set_if(c.seed, cfg.plan.seed);
  set_if(c.reps, cfg.experiment.reps);
  set_if(c.threads, cfg.experiment.threads);
  if (!c.out.empty()) cfg.experiment.out = c.out;
  if (!c.in.empty()) cfg.experiment.input = c.in;
  if (p != nullptr) {
    if (p->s1_mode) {
      using K = RowSamplePolicy::Kind;
      cfg.plan.s1.kind = *p->s1_mode == "absolute" ? K::Absolute : *p->s1_mode == "theory" ? K::Theory : K::FractionOfRows;
    } else if (p->s1) {
      cfg.plan.s1.kind = RowSamplePolicy::Kind::Absolute;
    } else if (p->s1_fraction) {
      cfg.plan.s1.kind = RowSamplePolicy::Kind::FractionOfRows;
    }
    set_if(p->s1, cfg.plan.s1.count);
    set_if(p->s1_fraction, cfg.plan.s1.ratio);
    set_if(p->eps1, cfg.plan.s1.eps);
    set_if(p->delta1, cfg.plan.s1.delta);
    set_if(p->beta1, cfg.plan.s1.beta);
    set_if(p->c0, cfg.plan.s1.c0);
    if (p->s2_mode) {
      cfg.plan.s2.kind =
          *p->s2_mode == "theory" ? ColumnSamplePolicy::Kind::Theory : ColumnSamplePolicy::Kind::Absolute;
    }
    set_if(p->s2, cfg.plan.s2.count);
    set_if(p->eps2, cfg.plan.s2.eps);
    set_if(p->delta2, cfg.plan.s2.delta);
    set_if(p->beta2, cfg.plan.s2.beta);
    if (p->oracle) cfg.plan.oracle_mode = true;
  }
  if (a != nullptr) {
    set_if(a->phi, cfg.arma.spec.phi);
    set_if(a->theta, cfg.arma.spec.theta);
    set_if(a->sigma2, cfg.arma.spec.sigma2);
    set_if(a->n, cfg.arma.n);
    if (a->mode) cfg.arma.options.mode = *a->mode == "exact" ? FitMode::Exact : FitMode::Sketched;
    if (a->ptilde) cfg.arma.options.ptilde = *a->ptilde;
    if (a->ptilde_max) cfg.arma.options.ptilde_max = *a->ptilde_max;
    set_if(a->alpha, cfg.arma.options.alpha);
  }
  apply_env_overrides(cfg);
  if (cfg.experiment.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.experiment.reps < 1) throw ConfigError("reps must be >= 1");
  return cfg;
}

std::string require_out(const RunConfig& cfg) {
  if (cfg.experiment.out.empty()) throw ConfigError("--out is required");
  return cfg.experiment.out;
}

bool is_csv(const fs::path& p) { return p.extension() == ".csv"; }

Matrix load_matrix(const std::string& path, bool header) {
  if (path.empty()) throw ConfigError("--in is required");
  return is_csv(path) ? read_csv_matrix(path, CsvOptions{header}) : read_matrix(path);
}

Vector load_series(const std::string& path, bool header) {
  if (path.empty()) throw ConfigError("--in is required");
  if (is_csv(path)) return read_series(path, CsvOptions{header});
  const Matrix a = read_matrix(path);
  if (a.cols() != 1) throw ConfigError("a series file must have exactly one column");
  return a.col(0);
}

void write_scores(const fs::path& path, const std::vector<LeverageScores>& runs) {
  if (runs.empty()) return;
  Matrix out(runs.front().m(), static_cast<Index>(runs.size()));
  std::vector<std::string> names;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.col(static_cast<Index>(r)) = runs[r].scores;
    names.push_back(runs.size() == 1 ? "score" : "rep" + std::to_string(r));
  }
  write_csv_matrix(path, out, CsvOptions{true}, names);
}

std::string policy_text(const RowSamplePolicy& p) {
  switch (p.kind) {
    case RowSamplePolicy::Kind::Absolute: return "absolute:" + std::to_string(p.count);
    case RowSamplePolicy::Kind::FractionOfRows: return "fraction:" + format_double(p.ratio);
    case RowSamplePolicy::Kind::Theory:
      return "theory:eps=" + format_double(p.eps) + ",delta=" + format_double(p.delta) + ",beta=" +
             format_double(p.beta) + ",c0=" + format_double(p.c0);
  }
  return "";
}

std::string policy_text(const ColumnSamplePolicy& p) {
  if (p.kind == ColumnSamplePolicy::Kind::Absolute) return "absolute:" + std::to_string(p.count);
  return "theory:eps=" + format_double(p.eps) + ",delta=" + format_double(p.delta) + ",beta=" + format_double(p.beta);
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

void emit_report(ExperimentReport& rep, const fs::path& out, const std::string& json) {
  write_report_csv(out, rep);
  (void)read_report_csv(out);
  if (!json.empty()) write_report_json(json, rep);
}

int run_gen_matrix(const Common& c, std::optional<Index> m_flag, std::optional<Index> n_flag,
                   std::optional<Index> k_flag, std::optional<double> scale_flag) {
  RunConfig cfg = resolve(c, nullptr, nullptr);
  const Index m = m_flag.value_or(cfg.experiment.m);
  const Index n = n_flag.value_or(cfg.experiment.n);
  const Index k = k_flag.value_or(cfg.experiment.outliers);
  const double scale = scale_flag.value_or(cfg.experiment.outlier_scale);
  const fs::path out = require_out(cfg);
  const GeneratedMatrix g = generate_matrix(m, n, k, scale, cfg.plan.seed);
  if (is_csv(out)) {
    write_csv_matrix(out, g.a);
  } else {
    write_matrix(out, g.a);
  }
  fs::path manifest = out;
  manifest += ".manifest.csv";
  std::ofstream mf(manifest, std::ios::trunc);
  if (!mf) throw IoError(IoErrorKind::Open, "cannot open '" + manifest.string() + "'");
  mf << "# m=" << m << "\n# n=" << n << "\n# outliers=" << k << "\n# scale=" << format_double(scale)
     << "\n# seed=" << cfg.plan.seed << "\noutlier_row\n";
  for (const Index i : g.outlier_rows) mf << i << '\n';
  if (!mf.flush()) throw IoError(IoErrorKind::Write, "failed writing '" + manifest.string() + "'");
  return 0;
}

int run_gen_arma(const Common& c, const ArmaFlags& af) {
  RunConfig cfg = resolve(c, nullptr, &af);
  const fs::path out = require_out(cfg);
  Rng rng(derive_seed(cfg.plan.seed, 0, StreamRole::Simulation));
  const Vector x = simulate_arma(cfg.arma.spec, cfg.arma.n, rng);
  if (is_csv(out)) {
    write_series(out, x);
  } else {
    write_matrix(out, x);
  }
  return 0;
}

int run_exact_lev(const Common& c, bool header) {
  RunConfig cfg = resolve(c, nullptr, nullptr);
  const std::string in = cfg.experiment.input;
  const fs::path out = require_out(cfg);
  const Matrix a = load_matrix(in, header);
  LeverageScores s;
  const double t = time_call([&] { s = hat_leverage(a, cfg.plan.rank_tol); });
  write_scores(out, {s});
  std::cerr << "exact leverage: " << a.rows() << "x" << a.cols() << " in " << t << " s\n";
  return 0;
}

int run_salsa(const Common& c, const PlanFlags& pf, bool header, bool stream) {
  RunConfig cfg = resolve(c, &pf, nullptr);
  const std::string in = cfg.experiment.input;
  cfg.plan.validate();
  const fs::path out = require_out(cfg);
  std::optional<Matrix> dense;
  std::optional<SmxReader> reader;
  std::optional<MatrixColumns> view;
  const ColumnSource* src = nullptr;
  if (stream) {
    if (is_csv(in)) throw ConfigError("--stream needs an .smx input");
    reader.emplace(in);
    src = &*reader;
  } else {
    dense = load_matrix(in, header);
    view.emplace(*dense);
    src = &*view;
  }
  const auto reps = static_cast<std::size_t>(cfg.experiment.reps);
  std::vector<LeverageScores> runs(reps);
  std::vector<SalsaResult> results(reps);
  // File-backed sources are read from a single thread.
  const int threads = stream ? 1 : cfg.experiment.threads;
  parallel_for(reps, threads, [&](std::size_t r) {
    SketchPlan plan = cfg.plan;
    plan.seed = reps == 1 ? cfg.plan.seed : derive_seed(cfg.plan.seed, r, StreamRole::Repetition);
    results[r] = salsa::salsa(*src, plan);
    runs[r] = results[r].scores;
  });
  write_scores(out, runs);
  if (cfg.plan.oracle_mode) {
    fs::path diag = out;
    diag += ".oracle.csv";
    std::ofstream df(diag, std::ios::trunc);
    if (!df) throw IoError(IoErrorKind::Open, "cannot open '" + diag.string() + "'");
    df << "rep,d,kappa_prefix,kappa,zeta,eta,xi,bound,observed_max_rel_error\n";
    for (std::size_t r = 0; r < reps; ++r) {
      for (const auto& s : results[r].diagnostics.steps) {
        df << r << ',' << s.d << ',' << format_double(s.kappa_prefix) << ',' << format_double(s.kappa) << ','
           << format_double(s.zeta) << ',' << format_double(s.eta) << ',' << format_double(s.xi) << ','
           << (s.bound ? format_double(*s.bound) : std::string("n/a")) << ','
           << format_double(s.observed_max_rel_error) << '\n';
      }
    }
  }
  return 0;
}

std::vector<SalsaGridPoint> make_grid(const std::vector<double>& s1s, const std::vector<std::size_t>& s2s,
                                      const SketchPlan& base) {
  std::vector<SalsaGridPoint> grid;
  for (const double s1 : s1s.empty() ? std::vector<double>{-1.0} : s1s) {
    for (const std::size_t s2 : s2s.empty() ? std::vector<std::size_t>{0} : s2s) {
      SalsaGridPoint g{base.s1, base.s2};
      if (s1 > 0.0) g.s1 = s1 < 1.0 ? RowSamplePolicy::fraction(s1) : RowSamplePolicy::absolute(static_cast<std::size_t>(s1));
      if (s2 > 0) g.s2 = ColumnSamplePolicy::absolute(s2);
      grid.push_back(g);
    }
  }
  return grid;
}

int run_compare(const Common& c, const PlanFlags& pf, bool header,
                const std::vector<double>& s1_grid, const std::vector<std::size_t>& s2_grid, const std::string& json) {
  RunConfig cfg = resolve(c, &pf, nullptr);
  const std::string in = cfg.experiment.input;
  const fs::path out = require_out(cfg);
  const Matrix a = load_matrix(in, header);
  CompareOptions o;
  o.grid = make_grid(s1_grid, s2_grid, cfg.plan);
  o.reps = cfg.experiment.reps;
  o.seed = cfg.plan.seed;
  o.threads = cfg.experiment.threads;
  o.rank_tol = cfg.plan.rank_tol;
  ExperimentReport rep = compare_leverage(a, o);
  rep.config.insert(rep.config.begin(), {"input", in});
  std::string s1s;
  std::string s2s;
  for (const auto& g : o.grid) {
    s1s += (s1s.empty() ? "" : ";") + policy_text(g.s1);
    s2s += (s2s.empty() ? "" : ";") + policy_text(g.s2);
  }
  rep.config.emplace_back("s1_grid", s1s);
  rep.config.emplace_back("s2_grid", s2s);
  rep.config.emplace_back("threads", std::to_string(o.threads));
  emit_report(rep, out, json);
  return 0;
}

int run_lsarma(const Common& c, const PlanFlags& pf, const ArmaFlags& af, bool header,
               std::vector<Index> pbars, std::vector<Index> qs, const std::string& curves) {
  RunConfig cfg = resolve(c, &pf, &af);
  const std::string in = cfg.experiment.input;
  cfg.plan.validate();
  const fs::path out = require_out(cfg);
  const Vector x = load_series(in, header);
  if (pbars.empty()) pbars = {cfg.arma.options.pbar};
  if (qs.empty()) qs = {cfg.arma.options.q};
  std::vector<LabelledFit> fits;
  std::ofstream of(out, std::ios::trunc);
  if (!of) throw IoError(IoErrorKind::Open, "cannot open '" + out.string() + "'");
  of << "# input=" << in << "\n# seed=" << cfg.plan.seed << "\n# s1=" << policy_text(cfg.plan.s1)
     << "\n# s2=" << policy_text(cfg.plan.s2)
     << "\n# mode=" << (cfg.arma.options.mode == FitMode::Exact ? "exact" : "sketched") << '\n';
  of << "label,pbar,q,p,ptilde,mean,sigma2_hat,order_not_identified,psi_hat,std_errors,wall_time\n";
  for (const Index pbar : pbars) {
    for (const Index q : qs) {
      LsarmaOptions o = cfg.arma.options;
      o.pbar = pbar;
      o.q = q;
      FitResult r;
      const double t = time_call([&] { r = lsarma(x, o, cfg.plan); });
      const std::string label = "pbar" + std::to_string(pbar) + "_q" + std::to_string(q);
      std::vector<double> psi(r.psi_hat.data(), r.psi_hat.data() + r.psi_hat.size());
      std::vector<double> se(r.std_errors.data(), r.std_errors.data() + r.std_errors.size());
      of << label << ',' << pbar << ',' << q << ',' << r.p << ',' << r.ptilde << ',' << format_double(r.mean) << ','
         << format_double(r.sigma2_hat) << ',' << (r.order_not_identified ? 1 : 0) << ',' << list_text(psi) << ','
         << list_text(se) << ',' << format_double(t) << '\n';
      if (r.order_not_identified) std::cerr << label << ": no PACF lag exceeds its band; fitted p = 0\n";
      fits.push_back({label, std::move(r)});
    }
  }
  if (!of.flush()) throw IoError(IoErrorKind::Write, "failed writing '" + out.string() + "'");
  fs::path cpath = curves;
  if (cpath.empty()) {
    cpath = out;
    cpath += ".curves.csv";
  }
  write_curves_csv(cpath, fits);
  return 0;
}

int run_arma_compare(const Common& c, const PlanFlags& pf, const ArmaFlags& af, const std::string& json) {
  RunConfig cfg = resolve(c, &pf, &af);
  cfg.plan.validate();
  const fs::path out = require_out(cfg);
  ArmaCompareOptions o;
  o.spec = cfg.arma.spec;
  o.n = cfg.arma.n;
  o.reps = cfg.experiment.reps;
  o.seed = cfg.plan.seed;
  o.threads = cfg.experiment.threads;
  o.plan = cfg.plan;
  o.options = cfg.arma.options;
  ExperimentReport rep = compare_arma(o);
  rep.config.emplace_back("phi", list_text(o.spec.phi));
  rep.config.emplace_back("theta", list_text(o.spec.theta));
  rep.config.emplace_back("sigma2", format_double(o.spec.sigma2));
  rep.config.emplace_back("s1", policy_text(o.plan.s1));
  rep.config.emplace_back("s2", policy_text(o.plan.s2));
  rep.config.emplace_back("threads", std::to_string(o.threads));
  emit_report(rep, out, json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and sketched leverage scores, and sketched ARMA fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "salsa-bench 1.0");

  Common common;
  PlanFlags plan;
  ArmaFlags arma;
  std::string json;
  std::string curves;
  bool header = false;
  bool stream = false;
  std::optional<Index> m;
  std::optional<Index> n;
  std::optional<Index> outliers;
  std::optional<double> scale;
  std::vector<double> s1_grid;
  std::vector<std::size_t> s2_grid;
  std::vector<Index> pbars;
  std::vector<Index> qs;

  auto* gen_matrix = app.add_subcommand("gen-matrix", "Gaussian matrix with scaled Cauchy outlier rows");
  add_common(gen_matrix, common);
  gen_matrix->add_option("--m", m, "Rows (default 100000)")->check(CLI::NonNegativeNumber);
  gen_matrix->add_option("--n", n, "Columns (default 50)")->check(CLI::NonNegativeNumber);
  gen_matrix->add_option("--outliers", outliers, "Number of perturbed rows (default 100)")->check(CLI::NonNegativeNumber);
  gen_matrix->add_option("--scale", scale, "Multiplier of the Cauchy noise (default 10)");

  auto* gen_arma = app.add_subcommand("gen-arma", "Simulate an ARMA(p, q) series");
  add_common(gen_arma, common);
  add_arma(gen_arma, arma);

  auto* exact = app.add_subcommand("exact-lev", "Exact leverage scores");
  add_common(exact, common);
  exact->add_option("--in", common.in, "Input matrix (.smx or .csv)");
  exact->add_flag("--header", header, "CSV input has a header row");

  auto* sal = app.add_subcommand("salsa", "Sequential approximate leverage scores");
  add_common(sal, common);
  add_plan(sal, plan);
  sal->add_option("--in", common.in, "Input matrix (.smx or .csv)");
  sal->add_flag("--header", header, "CSV input has a header row");
  sal->add_flag("--stream", stream, "Read columns from the .smx file on demand");

  auto* cmp = app.add_subcommand("compare", "Exact vs sketched leverage over an (s1, s2) grid");
  add_common(cmp, common);
  add_plan(cmp, plan);
  cmp->add_option("--in", common.in, "Input matrix (.smx or .csv)");
  cmp->add_flag("--header", header, "CSV input has a header row");
  cmp->add_option("--s1-grid", s1_grid, "Row sample sizes; values below 1 are fractions of m")->delimiter(',');
  cmp->add_option("--s2-grid", s2_grid, "Column sample sizes")->delimiter(',');
  cmp->add_option("--json", json, "Also write the report as JSON");

  auto* ls = app.add_subcommand("lsarma", "Identify the AR order and fit ARMA(p, q)");
  add_common(ls, common);
  add_plan(ls, plan);
  add_arma(ls, arma);
  ls->add_option("--in", common.in, "Input series (.csv, one value per line, or single-column .smx)");
  ls->add_flag("--header", header, "CSV input has a header row");
  ls->add_option("--pbar", pbars, "Largest AR order scanned (list allowed)")->delimiter(',');
  ls->add_option("--q", qs, "MA order (list allowed)")->delimiter(',');
  ls->add_option("--curves", curves, "PACF/BIC curve CSV (default <out>.curves.csv)");

  auto* ac = app.add_subcommand("arma-compare", "Exact vs sketched CMLE on simulated series");
  add_common(ac, common);
  add_plan(ac, plan);
  add_arma(ac, arma);
  ac->add_option("--json", json, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen_matrix) return run_gen_matrix(common, m, n, outliers, scale);
    if (*gen_arma) return run_gen_arma(common, arma);
    if (*exact) return run_exact_lev(common, header);
    if (*sal) return run_salsa(common, plan, header, stream);
    if (*cmp) return run_compare(common, plan, header, s1_grid, s2_grid, json);
    if (*ls) return run_lsarma(common, plan, arma, header, pbars, qs, curves);
    if (*ac) return run_arma_compare(common, plan, arma, json);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
