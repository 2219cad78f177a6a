#include "salsa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "salsa/dataio.hpp"
#include "salsa/errors.hpp"
#include "salsa/exact_leverage.hpp"
#include "salsa/salsa.hpp"

namespace salsa {

GeneratedMatrix generate_matrix(Index m, Index n, Index outliers, double scale, std::uint64_t seed) {
  if (m < 0 || n < 0 || outliers < 0 || outliers > m) {
    throw NumericalError(ErrorKind::InvalidArgument, "generate_matrix: need 0 <= outliers <= m");
  }
  GeneratedMatrix g;
  g.a.resize(m, n);
  Rng rng(derive_seed(seed, 0, StreamRole::Simulation));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) g.a(i, j) = rng.normal();
  }

  // Partial Fisher-Yates shuffle for distinct rows.
  Rng pick(derive_seed(seed, 0, StreamRole::Outliers));
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index k = 0; k < outliers; ++k) {
    const auto j = k + static_cast<Index>(pick.uniform_index(static_cast<std::uint64_t>(m - k)));
    std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
  }
  g.outlier_rows.assign(perm.begin(), perm.begin() + outliers);
  std::sort(g.outlier_rows.begin(), g.outlier_rows.end());

  Rng noise(derive_seed(seed, 1, StreamRole::Outliers));
  for (const Index i : g.outlier_rows) {
    for (Index j = 0; j < n; ++j) {
      const double num = noise.normal();
      const double den = noise.normal();
      g.a(i, j) += scale * num / den;
    }
  }
  return g;
}

double time_call(const std::function<void()>& fn, bool warm_up) {
  if (warm_up) fn();
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void ExperimentReport::finalize() {
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return std::tie(a.seed, a.s1, a.s2) < std::tie(b.seed, b.s1, b.s2);
  });
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const RunRow*>> cells;
  for (const RunRow& r : rows) cells[{r.s1, r.s2}].push_back(&r);
  aggregates.clear();
  const std::size_t k = metric_names.size();
  for (const auto& [key, members] : cells) {
    Aggregate agg;
    agg.s1 = key.first;
    agg.s2 = key.second;
    agg.runs = members.size();
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> v;
      for (const RunRow* r : members) v.push_back(r->metrics.at(j));
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (const double x : v) ss += (x - mean) * (x - mean);
      agg.median.push_back(median_of(v));
      agg.mean.push_back(mean);
      agg.stddev.push_back(v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0);
    }
    aggregates.push_back(std::move(agg));
  }
}

namespace {

constexpr std::size_t kWallExactCol = 4;
constexpr std::size_t kWallApproxCol = 5;

std::vector<std::string> header_fields(const ExperimentReport& r) {
  std::vector<std::string> h = {"kind", "seed", "s1", "s2", "wall_time_exact", "wall_time_approx"};
  for (const auto& m : r.metric_names) h.push_back(m);
  h.insert(h.end(), {"clamped", "degenerate", "runs"});
  for (const char* stat : {"median_", "mean_", "stddev_"}) {
    for (const auto& m : r.metric_names) h.push_back(stat + m);
  }
  return h;
}

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  throw IoError(IoErrorKind::Parse, "'" + path.string() + "':" + std::to_string(line) + ": " + msg);
}

bool close(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Open, "cannot open '" + path.string() + "' for writing");
  for (const auto& [k, v] : report.config) out << "# " << k << "=" << v << '\n';
  const std::size_t k = report.metric_names.size();
  out << join(header_fields(report)) << '\n';
  for (const RunRow& r : report.rows) {
    std::vector<std::string> f = {"run", std::to_string(r.seed), std::to_string(r.s1), std::to_string(r.s2),
                                  format_double(r.wall_time_exact), format_double(r.wall_time_approx)};
    for (const double m : r.metrics) f.push_back(format_double(m));
    f.insert(f.end(), {r.clamped ? "1" : "0", r.degenerate ? "1" : "0", ""});
    f.insert(f.end(), 3 * k, "");
    out << join(f) << '\n';
  }
  for (const Aggregate& a : report.aggregates) {
    std::vector<std::string> f = {"aggregate", "", std::to_string(a.s1), std::to_string(a.s2), "", ""};
    f.insert(f.end(), k, "");
    f.insert(f.end(), {"", "", std::to_string(a.runs)});
    for (const auto* stat : {&a.median, &a.mean, &a.stddev}) {
      for (const double v : *stat) f.push_back(format_double(v));
    }
    out << join(f) << '\n';
  }
  out.flush();
  if (!out) throw IoError(IoErrorKind::Write, "failed writing '" + path.string() + "'");
}

void write_report_json(const std::filesystem::path& path, const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) j["config"][k] = v;
  j["metrics"] = report.metric_names;
  j["runs"] = nlohmann::ordered_json::array();
  for (const RunRow& r : report.rows) {
    nlohmann::ordered_json row;
    row["seed"] = r.seed;
    row["s1"] = r.s1;
    row["s2"] = r.s2;
    row["wall_time_exact"] = r.wall_time_exact;
    row["wall_time_approx"] = r.wall_time_approx;
    for (std::size_t i = 0; i < r.metrics.size(); ++i) row[report.metric_names[i]] = r.metrics[i];
    row["clamped"] = r.clamped;
    row["degenerate"] = r.degenerate;
    j["runs"].push_back(row);
  }
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const Aggregate& a : report.aggregates) {
    nlohmann::ordered_json row;
    row["s1"] = a.s1;
    row["s2"] = a.s2;
    row["runs"] = a.runs;
    for (std::size_t i = 0; i < report.metric_names.size(); ++i) {
      row["median_" + report.metric_names[i]] = a.median[i];
      row["mean_" + report.metric_names[i]] = a.mean[i];
      row["stddev_" + report.metric_names[i]] = a.stddev[i];
    }
    j["aggregates"].push_back(row);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Open, "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError(IoErrorKind::Write, "failed writing '" + path.string() + "'");
}

ExperimentReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open '" + path.string() + "'");
  ExperimentReport rep;
  std::vector<Aggregate> stored;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t k = 0;

  auto num = [&](const std::string& f) {
    const auto v = parse_double(f);
    if (!v) parse_fail(path, line_no, "'" + f + "' is not a number");
    return *v;
  };
  auto count = [&](const std::string& f) {
    const double v = num(f);
    if (v < 0 || v != std::floor(v)) parse_fail(path, line_no, "'" + f + "' is not a count");
    return static_cast<std::size_t>(v);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) parse_fail(path, line_no, "config line without '='");
      rep.config.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    const auto f = split_fields(line);
    if (header.empty()) {
      header = f;
      if (header.size() < 9 || header[0] != "kind" || (header.size() - 9) % 4 != 0) {
        parse_fail(path, line_no, "unrecognised report header");
      }
      k = (header.size() - 9) / 4;
      rep.metric_names.assign(header.begin() + 6, header.begin() + 6 + static_cast<std::ptrdiff_t>(k));
      continue;
    }
    if (f.size() != header.size()) parse_fail(path, line_no, "wrong field count");
    if (f[0] == "run") {
      RunRow r;
      const auto res = std::from_chars(f[1].data(), f[1].data() + f[1].size(), r.seed);
      if (res.ec != std::errc() || res.ptr != f[1].data() + f[1].size()) parse_fail(path, line_no, "bad seed");
      r.s1 = count(f[2]);
      r.s2 = count(f[3]);
      r.wall_time_exact = num(f[4]);
      r.wall_time_approx = num(f[5]);
      for (std::size_t j = 0; j < k; ++j) r.metrics.push_back(num(f[6 + j]));
      r.clamped = f[6 + k] == "1";
      r.degenerate = f[7 + k] == "1";
      rep.rows.push_back(std::move(r));
    } else if (f[0] == "aggregate") {
      Aggregate a;
      a.s1 = count(f[2]);
      a.s2 = count(f[3]);
      a.runs = count(f[8 + k]);
      for (std::size_t j = 0; j < k; ++j) a.median.push_back(num(f[9 + k + j]));
      for (std::size_t j = 0; j < k; ++j) a.mean.push_back(num(f[9 + 2 * k + j]));
      for (std::size_t j = 0; j < k; ++j) a.stddev.push_back(num(f[9 + 3 * k + j]));
      stored.push_back(std::move(a));
    } else {
      parse_fail(path, line_no, "unknown row kind '" + f[0] + "'");
    }
  }
  if (header.empty()) parse_fail(path, line_no, "missing header");

  rep.finalize();
  if (stored.size() != rep.aggregates.size()) parse_fail(path, line_no, "aggregate count does not match runs");
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const Aggregate& s = stored[i];
    const Aggregate& c = rep.aggregates[i];
    bool ok = s.s1 == c.s1 && s.s2 == c.s2 && s.runs == c.runs;
    for (std::size_t j = 0; ok && j < k; ++j) {
      ok = close(s.median[j], c.median[j]) && close(s.mean[j], c.mean[j]) && close(s.stddev[j], c.stddev[j]);
    }
    if (!ok) {
      parse_fail(path, line_no, "aggregate for s1=" + std::to_string(s.s1) + ", s2=" + std::to_string(s.s2) +
                                    " is inconsistent with its run rows");
    }
  }
  return rep;
}

std::string report_without_timings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open '" + path.string() + "'");
  std::string out;
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) {
      if (seen_header) {
        auto f = split_fields(line);
        if (f.size() > kWallApproxCol) {
          f[kWallExactCol].clear();
          f[kWallApproxCol].clear();
        }
        line = join(f);
      }
      seen_header = true;
    }
    out += line;
    out += '\n';
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

ExperimentReport compare_leverage(const Matrix& a, const CompareOptions& opts) {
  if (opts.reps < 1) throw ConfigError("compare: reps must be >= 1");
  if (opts.grid.empty()) throw ConfigError("compare: empty (s1, s2) grid");
  ExperimentReport rep;
  rep.metric_names = {"mape"};
  rep.config = {{"m", std::to_string(a.rows())},
                {"n", std::to_string(a.cols())},
                {"reps", std::to_string(opts.reps)},
                {"seed", std::to_string(opts.seed)},
                {"grid_points", std::to_string(opts.grid.size())}};

  LeverageScores exact;
  const double t_exact = time_call([&] { exact = hat_leverage(a, opts.rank_tol); }, opts.warm_up);

  std::vector<SketchPlan> plans;
  for (const auto& g : opts.grid) {
    SketchPlan p;
    p.s1 = g.s1;
    p.s2 = g.s2;
    p.rank_tol = opts.rank_tol;
    p.oracle_mode = opts.oracle_mode;
    p.validate();
    plans.push_back(p);
  }
  if (opts.warm_up) {
    SketchPlan p = plans.front();
    p.seed = derive_seed(opts.seed, 0, StreamRole::Repetition, 1);
    (void)salsa(a, p);
  }

  const std::size_t reps = static_cast<std::size_t>(opts.reps);
  rep.rows.resize(plans.size() * reps);
  parallel_for(rep.rows.size(), opts.threads, [&](std::size_t job) {
    SketchPlan plan = plans[job / reps];
    const std::size_t r = job % reps;
    plan.seed = derive_seed(opts.seed, r, StreamRole::Repetition);
    SalsaResult res;
    const double t = time_call([&] { res = salsa(a, plan); });
    RunRow row;
    row.seed = plan.seed;
    row.s1 = resolve_row_sample_size(plan, a.cols() - 1, a.rows());
    row.s2 = resolve_column_sample_size(plan);
    row.wall_time_exact = t_exact;
    row.wall_time_approx = t;
    row.metrics = {mape(exact, res.scores)};
    for (const StepHealth& h : res.health) {
      row.clamped = row.clamped || h.s1_clamped;
      row.degenerate = row.degenerate || h.degenerate;
    }
    rep.rows[job] = std::move(row);
  });
  rep.finalize();
  return rep;
}

ExperimentReport compare_arma(const ArmaCompareOptions& opts) {
  if (opts.reps < 1) throw ConfigError("arma-compare: reps must be >= 1");
  opts.spec.validate();
  const Index p = opts.spec.p();
  const Index q = opts.spec.q();
  if (p + q < 1) throw ConfigError("arma-compare: the model needs p + q >= 1");
  Vector truth(p + q);
  for (Index i = 0; i < p; ++i) truth(i) = opts.spec.phi[static_cast<std::size_t>(i)];
  for (Index j = 0; j < q; ++j) truth(p + j) = opts.spec.theta[static_cast<std::size_t>(j)];

  ExperimentReport rep;
  rep.metric_names = {"param_error_sketched_vs_exact", "param_error_exact_vs_true"};
  rep.config = {{"p", std::to_string(p)},
                {"q", std::to_string(q)},
                {"n", std::to_string(opts.n)},
                {"reps", std::to_string(opts.reps)},
                {"seed", std::to_string(opts.seed)}};

  const std::size_t reps = static_cast<std::size_t>(opts.reps);
  rep.rows.resize(reps);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    Rng rng(derive_seed(opts.seed, r, StreamRole::Simulation));
    const Vector x = simulate_arma(opts.spec, opts.n, rng);
    LsarmaOptions o = opts.options;
    o.q = q;
    SketchPlan plan = opts.plan;
    plan.seed = derive_seed(opts.seed, r, StreamRole::Repetition);
    FitResult exact;
    FitResult sketched;
    o.mode = FitMode::Exact;
    const double t_exact = time_call([&] { exact = fit_arma(x, p, o, plan); });
    o.mode = FitMode::Sketched;
    const double t_sk = time_call([&] { sketched = fit_arma(x, p, o, plan); });
    RunRow row;
    row.seed = plan.seed;
    row.s1 = resolve_row_sample_size(plan, p + q, opts.n - q - sketched.ptilde);
    row.s2 = resolve_column_sample_size(plan);
    row.wall_time_exact = t_exact;
    row.wall_time_approx = t_sk;
    row.metrics = {param_percentage_error(exact.psi_hat, sketched.psi_hat),
                   param_percentage_error(truth, exact.psi_hat)};
    rep.rows[r] = std::move(row);
  });
  rep.finalize();
  return rep;
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<LabelledFit>& fits) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Open, "cannot open '" + path.string() + "' for writing");
  out << "label,curve,index,value\n";
  for (const auto& lf : fits) {
    auto emit = [&](const char* name, const std::vector<double>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        out << lf.label << ',' << name << ',' << (i + 1) << ',' << format_double(v[i]) << '\n';
      }
    };
    emit("bic", lf.fit.bic_curve);
    emit("pacf", lf.fit.pacf_curve);
    emit("pacf_band", lf.fit.pacf_band);
  }
  out.flush();
  if (!out) throw IoError(IoErrorKind::Write, "failed writing '" + path.string() + "'");
}

}  // namespace salsa
