#include "salsa/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "salsa/dataio.hpp"
#include "salsa/errors.hpp"

namespace salsa {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Bad {
  std::string what;
};

double to_real(std::string_view v) {
  const auto d = parse_double(v);
  if (!d) throw Bad{"'" + std::string(v) + "' is not a number"};
  return *d;
}

std::uint64_t to_unsigned(std::string_view v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Bad{"'" + std::string(v) + "' is not a non-negative integer"};
  }
  return out;
}

Index to_count(std::string_view v) {
  const std::uint64_t u = to_unsigned(v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<Index>::max())) throw Bad{"value out of range"};
  return static_cast<Index>(u);
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Bad{"'" + std::string(v) + "' is not a boolean"};
}

std::vector<double> to_list(std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = v.find(',', start);
    out.push_back(to_real(trim(v.substr(start, pos == std::string_view::npos ? pos : pos - start))));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Table = std::map<std::string, std::map<std::string, Setter>, std::less<>>;

const Table& table() {
  static const Table t = {
      {"plan",
       {
           {"s1_mode",
            [](RunConfig& c, std::string_view v) {
              using K = RowSamplePolicy::Kind;
              if (v == "fraction") c.plan.s1.kind = K::FractionOfRows;
              else if (v == "absolute") c.plan.s1.kind = K::Absolute;
              else if (v == "theory") c.plan.s1.kind = K::Theory;
              else throw Bad{"expected fraction, absolute or theory"};
            }},
           {"s1", [](RunConfig& c, std::string_view v) { c.plan.s1.count = to_unsigned(v); }},
           {"s1_fraction", [](RunConfig& c, std::string_view v) { c.plan.s1.ratio = to_real(v); }},
           {"eps1", [](RunConfig& c, std::string_view v) { c.plan.s1.eps = to_real(v); }},
           {"delta1", [](RunConfig& c, std::string_view v) { c.plan.s1.delta = to_real(v); }},
           {"beta1", [](RunConfig& c, std::string_view v) { c.plan.s1.beta = to_real(v); }},
           {"c0", [](RunConfig& c, std::string_view v) { c.plan.s1.c0 = to_real(v); }},
           {"s2_mode",
            [](RunConfig& c, std::string_view v) {
              using K = ColumnSamplePolicy::Kind;
              if (v == "absolute") c.plan.s2.kind = K::Absolute;
              else if (v == "theory") c.plan.s2.kind = K::Theory;
              else throw Bad{"expected absolute or theory"};
            }},
           {"s2", [](RunConfig& c, std::string_view v) { c.plan.s2.count = to_unsigned(v); }},
           {"eps2", [](RunConfig& c, std::string_view v) { c.plan.s2.eps = to_real(v); }},
           {"delta2", [](RunConfig& c, std::string_view v) { c.plan.s2.delta = to_real(v); }},
           {"beta2", [](RunConfig& c, std::string_view v) { c.plan.s2.beta = to_real(v); }},
           {"seed", [](RunConfig& c, std::string_view v) { c.plan.seed = to_unsigned(v); }},
           {"rank_tol", [](RunConfig& c, std::string_view v) { c.plan.rank_tol = to_real(v); }},
           {"oracle", [](RunConfig& c, std::string_view v) { c.plan.oracle_mode = to_bool(v); }},
       }},
      {"experiment",
       {
           {"m", [](RunConfig& c, std::string_view v) { c.experiment.m = to_count(v); }},
           {"n", [](RunConfig& c, std::string_view v) { c.experiment.n = to_count(v); }},
           {"outliers", [](RunConfig& c, std::string_view v) { c.experiment.outliers = to_count(v); }},
           {"outlier_scale", [](RunConfig& c, std::string_view v) { c.experiment.outlier_scale = to_real(v); }},
           {"reps", [](RunConfig& c, std::string_view v) { c.experiment.reps = static_cast<int>(to_count(v)); }},
           {"threads",
            [](RunConfig& c, std::string_view v) { c.experiment.threads = static_cast<int>(to_count(v)); }},
           {"out", [](RunConfig& c, std::string_view v) { c.experiment.out = std::string(v); }},
           {"input", [](RunConfig& c, std::string_view v) { c.experiment.input = std::string(v); }},
       }},
      {"arma",
       {
           {"phi", [](RunConfig& c, std::string_view v) { c.arma.spec.phi = to_list(v); }},
           {"theta", [](RunConfig& c, std::string_view v) { c.arma.spec.theta = to_list(v); }},
           {"sigma2", [](RunConfig& c, std::string_view v) { c.arma.spec.sigma2 = to_real(v); }},
           {"n", [](RunConfig& c, std::string_view v) { c.arma.n = to_count(v); }},
           {"pbar", [](RunConfig& c, std::string_view v) { c.arma.options.pbar = to_count(v); }},
           {"q", [](RunConfig& c, std::string_view v) { c.arma.options.q = to_count(v); }},
           {"ptilde", [](RunConfig& c, std::string_view v) { c.arma.options.ptilde = to_count(v); }},
           {"ptilde_max", [](RunConfig& c, std::string_view v) { c.arma.options.ptilde_max = to_count(v); }},
           {"mode",
            [](RunConfig& c, std::string_view v) {
              if (v == "exact") c.arma.options.mode = FitMode::Exact;
              else if (v == "sketched") c.arma.options.mode = FitMode::Sketched;
              else throw Bad{"expected exact or sketched"};
            }},
           {"alpha", [](RunConfig& c, std::string_view v) { c.arma.options.alpha = to_real(v); }},
           {"bonferroni", [](RunConfig& c, std::string_view v) { c.arma.options.bonferroni = to_bool(v); }},
       }},
  };
  return t;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  const Table& t = table();
  const std::map<std::string, Setter>* section = nullptr;
  std::string section_name;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section_name = std::string(trim(line.substr(1, line.size() - 2)));
      const auto it = t.find(section_name);
      if (it == t.end()) fail("unknown section [" + section_name + "]");
      section = &it->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section == nullptr) fail("key '" + key + "' appears before any section");
    const auto it = section->find(key);
    if (it == section->end()) fail("unknown key '" + key + "' in [" + section_name + "]");
    try {
      it->second(cfg, value);
    } catch (const Bad& b) {
      fail("key '" + key + "': " + b.what);
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void apply_env_overrides(RunConfig& cfg) {
  const char* env = std::getenv("SALSA_SEED");
  if (env == nullptr) return;
  try {
    cfg.plan.seed = to_unsigned(trim(env));
  } catch (const Bad& b) {
    throw ConfigError("SALSA_SEED: " + b.what);
  }
}

}  // namespace salsa
