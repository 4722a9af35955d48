#pragma once

// Experiment plumbing: flat key-value configuration, the six experiment drivers
// behind the command-line tool, and CSV/JSON reports.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "circle_method.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "martingales.hpp"
#include "radon.hpp"
#include "seminorms.hpp"

namespace radonlab {

// ---------------------------------------------------------------- configuration

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace detail

/// Parse `key = value` lines; `#` starts a comment. Keys are dotted paths.
inline ConfigMap parse_config(std::istream& in, const std::string& source = "config") {
  ConfigMap out;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error(source + ":" + std::to_string(no) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw usage_error(source + ":" + std::to_string(no) + ": empty key");
    if (out.count(key)) throw usage_error(source + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
    out[key] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw usage_error("config: cannot open '" + path + "'");
  return parse_config(f, path);
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"verify-kernel",  "probe-oscillation", "gauss-table",
                                              "multiplier-scan", "martingale-probe", "split-check"};
  return names;
}

/// Every recognised key with its default value.
inline ConfigMap default_config(const std::string& experiment) {
  ConfigMap c{
      {"experiment", experiment},
      {"preset", ""},
      {"seed", "0"},
      {"threads", "1"},
      {"gamma.k", "1"},
      {"gamma.exponents", "3"},
      {"kernel", "hilbert"},
      {"kernel.component", "1"},
      {"omega.shape", "euclidean_ball"},
      {"omega.c", "0.5"},
      {"omega.axes", ""},
      {"grid.t_min", "1"},
      {"grid.t_max", "32"},
      {"grid.count", "64"},
      {"seminorm.p", "2"},
      {"seminorm.n", "8"},
      {"seminorm.strategy", "random-restarts"},
      {"seminorm.restarts", "200"},
      {"input.kind", "random"},
      {"input.half_widths", "64,128,256,512"},
      {"tolerance.drift", "0.25"},
      {"tolerance.slope", "0.05"},
      {"kernel_check.samples", "100000"},
      {"kernel_check.annuli", "100"},
      {"kernel_check.size_tol", "1e-12"},
      {"kernel_check.cancel_tol", "1e-13"},
      {"kernel_check.holder_drift", "0.01"},
      {"gauss.q_max", "101"},
      {"gauss.primes_only", "true"},
      {"gauss.delta", "0.5"},
      {"gauss.delta_tol", "0.05"},
      {"scan.t", "10,100,1000"},
      {"scan.xi_integer_max", "3"},
      {"scan.integer_tol", "1e-10"},
      {"scan.xi_min", "0.01"},
      {"scan.xi_max", "10"},
      {"scan.t_min", "0.5"},
      {"scan.t_max", "8"},
      {"scan.count", "10"},
      {"scan.closed_form_tol", "1e-6"},
      {"martingale.base", "2"},
      {"martingale.levels", "-1,0,1,2,3"},
      {"martingale.h", "0.25"},
      {"martingale.extent", "64"},
      {"martingale.bumps", "6"},
      {"martingale.n", "2"},
      {"split.tau", "0.5"},
      {"split.c", "4"},
      {"budget.cells", std::to_string(kDefaultBudget)},
      {"budget.seconds", "600"},
  };
  if (experiment == "split-check") {
    c["grid.count"] = "16";
    c["input.half_widths"] = "32";
    c["seminorm.n"] = "4";
    c["seminorm.strategy"] = "block-dp";
  }
  if (experiment == "martingale-probe") c["gamma.exponents"] = "1;2";
  if (experiment == "gauss-table") c["gamma.exponents"] = "2";
  return c;
}

/// Preset values; applied over the defaults and under explicit keys.
inline ConfigMap preset_config(const std::string& name) {
  if (name.empty()) return {};
  if (name == "cubic-hilbert")
    return {{"experiment", "multiplier-scan"}, {"gamma.k", "1"}, {"gamma.exponents", "3"},
            {"kernel", "hilbert"},             {"omega.shape", "euclidean_ball"}};
  if (name == "zero-input")
    return {{"experiment", "probe-oscillation"}, {"input.kind", "zero"},        {"input.half_widths", "8,16"},
            {"grid.count", "12"},                {"grid.t_max", "8"},           {"seminorm.n", "3"},
            {"seminorm.strategy", "exhaustive"}};
  throw usage_error("field 'preset': unknown preset '" + name + "'");
}

struct ExperimentConfig {
  std::string experiment;
  std::string preset;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  MultiIndexSet gamma = MultiIndexSet::univariate({3});
  std::string kernel_name = "hilbert";
  int kernel_component = 1;
  std::string omega_shape = "euclidean_ball";
  double omega_c = 0.5;
  std::vector<double> omega_axes;
  double t_min = 1, t_max = 32;
  std::size_t t_count = 64;
  double p = 2;
  std::size_t n_blocks = 8;
  SearchStrategy strategy = SearchStrategy::random_restarts;
  std::size_t restarts = 200;
  std::string input_kind = "random";
  std::vector<std::int64_t> half_widths;
  double tol_drift = 0.25, tol_slope = 0.05;
  std::size_t kc_samples = 100000, kc_annuli = 100;
  double kc_size_tol = 1e-12, kc_cancel_tol = 1e-13, kc_holder_drift = 0.01;
  std::int64_t q_max = 101;
  bool primes_only = true;
  double delta = 0.5, delta_tol = 0.05;
  std::vector<double> scan_t;
  std::int64_t xi_integer_max = 3;
  double integer_tol = 1e-10;
  double xi_min = 0.01, xi_max = 10, scan_t_min = 0.5, scan_t_max = 8;
  std::size_t scan_count = 10;
  double closed_form_tol = 1e-6;
  int mart_base = 2;
  std::vector<int> mart_levels;
  double mart_h = 0.25, mart_extent = 64;
  std::size_t mart_bumps = 6, mart_n = 2;
  double tau = 0.5, split_c = 4;
  std::uint64_t budget_cells = kDefaultBudget;
  double budget_seconds = 600;
  ConfigMap effective;  // the resolved key-value map, echoed into reports

  CZKernel kernel() const {
    if (kernel_name == "hilbert") return make_hilbert_kernel();
    return make_riesz_type_kernel(gamma.k(), kernel_component);
  }
  ConvexBody omega() const {
    if (omega_shape == "euclidean_ball") return ConvexBody::euclidean_ball(gamma.k(), omega_c);
    if (omega_shape == "max_ball") return ConvexBody::max_ball(gamma.k(), omega_c);
    return ConvexBody::ellipsoid(omega_axes, omega_c);
  }
};

namespace detail {

class FieldReader {
 public:
  explicit FieldReader(const ConfigMap& m) : m_(m) {}

  const std::string& str(const std::string& key) const { return m_.at(key); }

  double real(const std::string& key) const { return parse_real(key, str(key)); }

  template <typename Int>
  Int integer(const std::string& key, Int lo) const {
    return parse_int<Int>(key, str(key), lo);
  }

  bool boolean(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw usage_error("field '" + key + "': expected true or false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split(str(key), ',')) out.push_back(parse_real(key, s));
    return out;
  }

  template <typename Int>
  std::vector<Int> integers(const std::string& key, Int lo) const {
    std::vector<Int> out;
    for (const auto& s : split(str(key), ',')) out.push_back(parse_int<Int>(key, s, lo));
    return out;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw usage_error("field '" + key + "': expected a number, got '" + s + "'");
    }
  }
  template <typename Int>
  static Int parse_int(const std::string& key, const std::string& s, Int lo) {
    long long v = 0;
    try {
      std::size_t used = 0;
      v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw usage_error("field '" + key + "': expected an integer, got '" + s + "'");
    }
    if (v < (long long)lo) throw usage_error("field '" + key + "': must be at least " + std::to_string(lo));
    return Int(v);
  }

  const ConfigMap& m_;
};

/// "3" -> {(3)}; "1,0;1,1" -> {(1,0),(1,1)} for k = 2.
inline MultiIndexSet parse_gamma(int k, const std::string& text) {
  std::vector<MultiIndex> exps;
  for (const auto& part : split(text, ';')) {
    MultiIndex g;
    for (const auto& c : split(part, ',')) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(c, &used);
        if (used != c.size() || v < 0) throw std::invalid_argument(c);
        g.push_back(v);
      } catch (const std::exception&) {
        throw usage_error("field 'gamma.exponents': bad exponent '" + c + "'");
      }
    }
    if (int(g.size()) != k)
      throw usage_error("field 'gamma.exponents': multi-index '" + part + "' does not have k = " + std::to_string(k) +
                        " entries");
    exps.push_back(std::move(g));
  }
  try {
    return MultiIndexSet(k, std::move(exps));
  } catch (const std::exception& e) {
    throw usage_error(std::string("field 'gamma.exponents': ") + e.what());
  }
}

}  // namespace detail

/// Resolve defaults, preset and explicit keys (in increasing priority) and validate.
inline ExperimentConfig make_config(const std::string& experiment, const ConfigMap& explicit_keys) {
  std::string exp = experiment;
  std::string preset;
  if (auto it = explicit_keys.find("preset"); it != explicit_keys.end()) preset = it->second;
  const ConfigMap pre = preset_config(preset);
  if (exp.empty()) {
    if (auto it = explicit_keys.find("experiment"); it != explicit_keys.end()) exp = it->second;
    else if (auto jt = pre.find("experiment"); jt != pre.end()) exp = jt->second;
  }
  if (std::find(experiment_names().begin(), experiment_names().end(), exp) == experiment_names().end())
    throw usage_error("field 'experiment': unknown experiment '" + exp + "'");
  if (auto it = pre.find("experiment"); it != pre.end() && it->second != exp)
    throw usage_error("field 'preset': preset '" + preset + "' belongs to experiment '" + it->second + "'");
  ConfigMap m = default_config(exp);
  for (const auto& [k, v] : pre) m[k] = v;
  for (const auto& [k, v] : explicit_keys) {
    if (!m.count(k)) throw usage_error("field '" + k + "': unknown key");
    m[k] = v;
  }
  if (m["experiment"] != exp)
    throw usage_error("field 'experiment': config names '" + m["experiment"] + "' but '" + exp + "' was requested");

  const detail::FieldReader r(m);
  ExperimentConfig c;
  c.experiment = exp;
  c.preset = preset;
  c.seed = r.integer<std::uint64_t>("seed", 0);
  c.threads = r.integer<unsigned>("threads", 1);
  c.gamma = detail::parse_gamma(r.integer<int>("gamma.k", 1), r.str("gamma.exponents"));
  c.kernel_name = r.str("kernel");
  if (c.kernel_name != "hilbert" && c.kernel_name != "riesz")
    throw usage_error("field 'kernel': expected hilbert or riesz");
  if (c.kernel_name == "hilbert" && c.gamma.k() != 1) throw usage_error("field 'kernel': hilbert needs gamma.k = 1");
  c.kernel_component = r.integer<int>("kernel.component", 1);
  if (c.kernel_component > c.gamma.k()) throw usage_error("field 'kernel.component': exceeds gamma.k");
  c.omega_shape = r.str("omega.shape");
  if (c.omega_shape != "euclidean_ball" && c.omega_shape != "max_ball" && c.omega_shape != "ellipsoid")
    throw usage_error("field 'omega.shape': expected euclidean_ball, max_ball or ellipsoid");
  c.omega_c = r.real("omega.c");
  if (c.omega_shape == "ellipsoid") {
    c.omega_axes = r.reals("omega.axes");
    if (int(c.omega_axes.size()) != c.gamma.k()) throw usage_error("field 'omega.axes': need gamma.k axes");
  }
  try {
    (void)c.omega();
  } catch (const std::exception& e) {
    throw usage_error(std::string("field 'omega.c': ") + e.what());
  }
  c.t_min = r.real("grid.t_min");
  c.t_max = r.real("grid.t_max");
  c.t_count = r.integer<std::size_t>("grid.count", 2);
  if (!(c.t_min > 0 && c.t_max > c.t_min)) throw usage_error("field 'grid.t_max': need 0 < t_min < t_max");
  c.p = r.real("seminorm.p");
  if (!(c.p >= 1)) throw usage_error("field 'seminorm.p': must be at least 1");
  c.n_blocks = r.integer<std::size_t>("seminorm.n", 1);
  try {
    c.strategy = parse_strategy(r.str("seminorm.strategy"));
  } catch (const std::exception& e) {
    throw usage_error(std::string("field 'seminorm.strategy': ") + e.what());
  }
  c.restarts = r.integer<std::size_t>("seminorm.restarts", 0);
  c.input_kind = r.str("input.kind");
  if (c.input_kind != "random" && c.input_kind != "zero") throw usage_error("field 'input.kind': expected random or zero");
  c.half_widths = r.integers<std::int64_t>("input.half_widths", 1);
  c.tol_drift = r.real("tolerance.drift");
  c.tol_slope = r.real("tolerance.slope");
  c.kc_samples = r.integer<std::size_t>("kernel_check.samples", 1);
  c.kc_annuli = r.integer<std::size_t>("kernel_check.annuli", 1);
  c.kc_size_tol = r.real("kernel_check.size_tol");
  c.kc_cancel_tol = r.real("kernel_check.cancel_tol");
  c.kc_holder_drift = r.real("kernel_check.holder_drift");
  c.q_max = r.integer<std::int64_t>("gauss.q_max", 10);
  c.primes_only = r.boolean("gauss.primes_only");
  c.delta = r.real("gauss.delta");
  c.delta_tol = r.real("gauss.delta_tol");
  c.scan_t = r.reals("scan.t");
  for (double t : c.scan_t)
    if (!(t > 0)) throw usage_error("field 'scan.t': times must be positive");
  c.xi_integer_max = r.integer<std::int64_t>("scan.xi_integer_max", 0);
  c.integer_tol = r.real("scan.integer_tol");
  c.xi_min = r.real("scan.xi_min");
  c.xi_max = r.real("scan.xi_max");
  c.scan_t_min = r.real("scan.t_min");
  c.scan_t_max = r.real("scan.t_max");
  if (!(c.xi_min > 0 && c.xi_max >= c.xi_min)) throw usage_error("field 'scan.xi_max': need 0 < xi_min <= xi_max");
  if (!(c.scan_t_min > 0 && c.scan_t_max >= c.scan_t_min))
    throw usage_error("field 'scan.t_max': need 0 < t_min <= t_max");
  c.scan_count = r.integer<std::size_t>("scan.count", 2);
  c.closed_form_tol = r.real("scan.closed_form_tol");
  c.mart_base = r.integer<int>("martingale.base", 2);
  c.mart_levels = r.integers<int>("martingale.levels", std::numeric_limits<int>::min());
  for (std::size_t i = 1; i < c.mart_levels.size(); ++i)
    if (c.mart_levels[i] <= c.mart_levels[i - 1]) throw usage_error("field 'martingale.levels': must increase");
  if (c.mart_levels.size() < 2) throw usage_error("field 'martingale.levels': need at least two levels");
  c.mart_h = r.real("martingale.h");
  c.mart_extent = r.real("martingale.extent");
  if (!(c.mart_h > 0 && c.mart_extent > 0)) throw usage_error("field 'martingale.h': spacing and extent must be positive");
  c.mart_bumps = r.integer<std::size_t>("martingale.bumps", 1);
  c.mart_n = r.integer<std::size_t>("martingale.n", 1);
  c.tau = r.real("split.tau");
  if (!(c.tau > 0 && c.tau < 1)) throw usage_error("field 'split.tau': must lie in (0, 1)");
  c.split_c = r.real("split.c");
  c.budget_cells = r.integer<std::uint64_t>("budget.cells", 1);
  c.budget_seconds = r.real("budget.seconds");
  if (!(c.budget_seconds > 0)) throw usage_error("field 'budget.seconds': must be positive");
  c.effective = m;
  return c;
}

// ---------------------------------------------------------------- reports

struct ReportRow {
  std::string experiment;
  double scale = 0;
  double p = 0;
  std::size_t n = 0;
  std::string statistic;  // "<operation>.<quantity>"
  double value = 0;
  std::optional<double> tolerance;
  bool pass = true;

  bool operator==(const ReportRow&) const = default;
};

struct Report {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::string experiment;
  ConfigMap config;
  std::vector<ReportRow> rows;
  std::map<std::string, double> fits;
  bool complete = true;
  std::string note;                        // reason when incomplete
  std::map<std::string, double> timings;   // seconds; not part of equality

  bool passed() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  bool operator==(const Report& o) const {
    return schema_version == o.schema_version && experiment == o.experiment && config == o.config &&
           rows == o.rows && fits == o.fits && complete == o.complete && note == o.note;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_csv(const Report& rep, std::ostream& out) {
  out << "experiment,scale,p,N,statistic,value,tolerance,pass\n";
  for (const auto& r : rep.rows) {
    out << r.experiment << ',' << detail::fmt_double(r.scale) << ',' << detail::fmt_double(r.p) << ',' << r.n << ','
        << r.statistic << ',' << detail::fmt_double(r.value) << ','
        << (r.tolerance ? detail::fmt_double(*r.tolerance) : std::string()) << ',' << (r.pass ? "true" : "false")
        << '\n';
  }
}

inline nlohmann::json to_json(const Report& rep) {
  nlohmann::json j;
  j["schema_version"] = rep.schema_version;
  j["experiment"] = rep.experiment;
  j["config"] = rep.config;
  j["complete"] = rep.complete;
  j["note"] = rep.note;
  j["fits"] = rep.fits;
  j["timings"] = rep.timings;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json row{{"experiment", r.experiment}, {"scale", r.scale}, {"p", r.p},         {"N", r.n},
                       {"statistic", r.statistic},   {"value", r.value}, {"pass", r.pass}};
    row["tolerance"] = r.tolerance ? nlohmann::json(*r.tolerance) : nlohmann::json(nullptr);
    j["rows"].push_back(std::move(row));
  }
  return j;
}

inline Report report_from_json(const nlohmann::json& j) {
  Report rep;
  rep.schema_version = j.at("schema_version").get<int>();
  if (rep.schema_version != Report::kSchemaVersion) throw usage_error("report: unsupported schema version");
  rep.experiment = j.at("experiment").get<std::string>();
  rep.config = j.at("config").get<ConfigMap>();
  rep.complete = j.at("complete").get<bool>();
  rep.note = j.at("note").get<std::string>();
  rep.fits = j.at("fits").get<std::map<std::string, double>>();
  rep.timings = j.at("timings").get<std::map<std::string, double>>();
  for (const auto& row : j.at("rows")) {
    ReportRow r;
    r.experiment = row.at("experiment").get<std::string>();
    r.scale = row.at("scale").get<double>();
    r.p = row.at("p").get<double>();
    r.n = row.at("N").get<std::size_t>();
    r.statistic = row.at("statistic").get<std::string>();
    r.value = row.at("value").get<double>();
    if (!row.at("tolerance").is_null()) r.tolerance = row.at("tolerance").get<double>();
    r.pass = row.at("pass").get<bool>();
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

inline void write_json(const Report& rep, std::ostream& out) { out << to_json(rep).dump(2) << '\n'; }

// ---------------------------------------------------------------- experiments

/// Oscillation family {H_t f : t in grid} flattened point-major over the common output box.
inline SampledFamily radon_sampled_family(const LatticeFunction& f, const CZKernel& kernel, const ConvexBody& omega,
                                          const MultiIndexSet& gamma, const TruncationGrid& grid,
                                          std::uint64_t budget = kDefaultBudget) {
  const RadonStencil top = make_stencil(kernel, omega, gamma, grid[grid.size() - 1], budget);
  const Box box = output_box(f.box(), top);
  if (double(box.volume()) * double(grid.size()) > double(budget))
    throw budget_exceeded("radon_sampled_family: family exceeds the cell budget");
  const auto members = radon_family(f, kernel, omega, gamma, grid.times(), budget);
  SampledFamily fam(grid, box.volume(), 1.0);
  for (std::size_t j = 0; j < members.size(); ++j)
    for (std::size_t x = 0; x < fam.points; ++x) fam.at(x)[j] = members[j][x];
  return fam;
}

/// i.i.d. standard normal values on [-M, M]^d, scaled to unit l^2 norm.
inline LatticeFunction random_unit_input(std::size_t d, std::int64_t half_width, std::uint64_t seed) {
  LatticeFunction f(Box::centered(d, half_width));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng);
  const double norm = lp_norm(f, 2.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] /= norm;
  return f;
}

namespace detail {

class Runner {
 public:
  explicit Runner(const ExperimentConfig& c) : c_(c), start_(std::chrono::steady_clock::now()) {
    rep_.experiment = c.experiment;
    rep_.config = c.effective;
  }

  void row(double scale, double p, std::size_t n, const std::string& stat, double value,
           std::optional<double> tol = std::nullopt, std::optional<bool> pass = std::nullopt) {
    ReportRow r{c_.experiment, scale, p, n, stat, value, tol, pass.value_or(tol ? value <= *tol : true)};
    rep_.rows.push_back(std::move(r));
  }

  /// Throws budget_exceeded once the wall-clock budget is spent.
  void check_clock(const std::string& where) const {
    if (elapsed() > c_.budget_seconds) throw budget_exceeded(where + ": wall-clock budget exceeded");
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  Report& report() { return rep_; }

 private:
  const ExperimentConfig& c_;
  std::chrono::steady_clock::time_point start_;
  Report rep_;
};

/// max |a_i - a_j| / a_j over consecutive probe values, and the log-log slope.
inline std::pair<double, double> drift_and_slope(const std::vector<double>& scales, const std::vector<double>& vals) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    lo = std::min(lo, vals[i]);
    hi = std::max(hi, vals[i]);
    if (vals[i] > 0) {
      lx.push_back(std::log(scales[i]));
      ly.push_back(std::log(vals[i]));
    }
  }
  const double drift = hi > 0 ? (hi - lo) / hi : 0.0;
  const double slope = lx.size() >= 2 ? fit_line(lx, ly).first : 0.0;
  return {drift, slope};
}

inline void run_verify_kernel(const ExperimentConfig& c, Runner& run) {
  const CZKernel k = c.kernel();
  const ConvexBody omega = c.omega();
  const auto a = verify_size_and_holder(k, c.kc_samples, c.seed + 1);
  const auto b = verify_size_and_holder(k, 2 * c.kc_samples, c.seed + 2);
  run.row(double(c.kc_samples), 0, 0, "verify_size_and_holder.max_size_ratio", a.max_size_ratio, 1 + c.kc_size_tol);
  run.row(double(2 * c.kc_samples), 0, 0, "verify_size_and_holder.max_size_ratio", b.max_size_ratio,
          1 + c.kc_size_tol);
  run.row(double(c.kc_samples), 0, 0, "verify_size_and_holder.max_holder_ratio", a.max_holder_ratio);
  run.row(double(2 * c.kc_samples), 0, 0, "verify_size_and_holder.max_holder_ratio", b.max_holder_ratio);
  const double drift = std::abs(b.max_holder_ratio - a.max_holder_ratio) / std::max(b.max_holder_ratio, 1e-300);
  run.row(double(2 * c.kc_samples), 0, 0, "verify_size_and_holder.holder_drift", drift, c.kc_holder_drift);
  run.check_clock("verify-kernel");
  std::mt19937_64 rng(c.seed + 3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0;
  for (std::size_t i = 0; i < c.kc_annuli; ++i) {
    double r = std::pow(10.0, u(rng)), big = std::pow(10.0, u(rng));
    if (r > big) std::swap(r, big);
    if (big <= r) big = 2 * r;
    worst = std::max(worst, verify_cancellation(k, omega, r, big, 1, c.budget_cells));
  }
  run.row(double(c.kc_annuli), 0, 0, "verify_cancellation.max_residual", worst, c.kc_cancel_tol);
  run.report().fits["holder_constant"] = k.holder_constant();
}

inline void run_probe_oscillation(const ExperimentConfig& c, Runner& run) {
  const CZKernel k = c.kernel();
  const ConvexBody omega = c.omega();
  const auto grid = TruncationGrid::log_spaced(c.t_min, c.t_max, c.t_count);
  std::vector<double> scales, ratios;
  for (std::size_t i = 0; i < c.half_widths.size(); ++i) {
    const std::int64_t m = c.half_widths[i];
    LatticeFunction f = random_unit_input(c.gamma.size(), m, detail::splitmix64(c.seed ^ std::uint64_t(m)));
    if (c.input_kind == "zero")
      for (std::size_t j = 0; j < f.size(); ++j) f[j] = 0;
    const SampledFamily fam = radon_sampled_family(f, k, omega, c.gamma, grid, c.budget_cells);
    const SearchResult r = worst_sequence_search(fam, c.p, c.n_blocks, c.strategy, c.restarts, c.seed);
    const double fn = lp_norm(f, c.p);
    const double ratio = fn > 0 ? r.value / fn : 0.0;
    if (c.input_kind == "zero") {
      run.row(double(m), c.p, c.n_blocks, "worst_sequence_search.value", r.value, 0.0);
      run.row(double(m), c.p, c.n_blocks, "maximal_function.norm",
              detail::weighted_lp(maximal_function(fam), c.p, fam.weight), 0.0);
    } else {
      run.row(double(m), c.p, c.n_blocks, "worst_sequence_search.value", r.value);
    }
    run.row(double(m), c.p, c.n_blocks, "worst_sequence_search.ratio", ratio);
    scales.push_back(double(m));
    ratios.push_back(ratio);
    run.check_clock("probe-oscillation");
  }
  if (c.input_kind == "random" && ratios.size() >= 2) {
    const auto [drift, slope] = drift_and_slope(scales, ratios);
    run.row(scales.back(), c.p, c.n_blocks, "worst_sequence_search.ratio_drift", drift, c.tol_drift);
    run.row(scales.back(), c.p, c.n_blocks, "worst_sequence_search.ratio_loglog_slope", slope, c.tol_slope);
    run.report().fits["ratio_drift"] = drift;
    run.report().fits["ratio_loglog_slope"] = slope;
  }
}

inline void run_gauss_table(const ExperimentConfig& c, Runner& run) {
  const auto g0 = gauss_sum(RationalPoint(IntPoint(c.gamma.size(), 0), 1), c.gamma, c.budget_cells);
  run.row(1, 0, 0, "gauss_sum.origin_error", std::abs(g0 - cplx(1.0, 0.0)), 0.0);
  const auto fit = gauss_decay_fit(c.gamma, c.q_max, c.primes_only, c.budget_cells);
  for (const auto& r : fit.table) run.row(double(r.q), 0, 0, "gauss_sum.max_abs", r.max_abs, 1.0 + 1e-12);
  const double err = std::abs(fit.delta - c.delta);
  run.row(double(c.q_max), 0, 0, "gauss_decay_fit.delta", fit.delta);
  run.row(double(c.q_max), 0, 0, "gauss_decay_fit.delta_error", err, c.delta_tol);
  run.report().fits["delta"] = fit.delta;
}

inline bool is_cubic_example(const ExperimentConfig& c) {
  return c.gamma.k() == 1 && c.gamma.size() == 1 && c.gamma[0][0] == 3 && c.kernel_name == "hilbert";
}

inline void run_multiplier_scan(const ExperimentConfig& c, Runner& run) {
  const CZKernel k = c.kernel();
  const ConvexBody omega = c.omega();
  for (double t : c.scan_t) {
    const RadonStencil s = make_stencil(k, omega, c.gamma, t, c.budget_cells);
    double worst = 0;
    RealPoint xi(c.gamma.size());
    for (std::int64_t j = -c.xi_integer_max; j <= c.xi_integer_max; ++j) {
      std::fill(xi.begin(), xi.end(), double(j));
      worst = std::max(worst, std::abs(exp_multiplier(s, xi)));
    }
    run.row(t, 0, 0, "exp_multiplier.integer_max_abs", worst, c.integer_tol);
    run.check_clock("multiplier-scan");
  }
  // continuous multiplier on log-spaced (xi, t) pairs
  for (std::size_t a = 0; a < c.scan_count; ++a) {
    const double t = c.scan_t_min * std::pow(c.scan_t_max / c.scan_t_min, double(a) / double(c.scan_count - 1));
    double err = 0, est = 0, mag = 0;
    for (std::size_t b = 0; b < c.scan_count; ++b) {
      double x = c.xi_min * std::pow(c.xi_max / c.xi_min, double(b) / double(c.scan_count - 1));
      if ((a + b) % 3 == 0) x = -x;
      RealPoint xi(c.gamma.size(), x);
      const QuadResult q = cont_multiplier(xi, k, omega, c.gamma, t, 1, std::numeric_limits<double>::infinity(),
                                           c.budget_cells);
      est = std::max(est, q.error);
      mag = std::max(mag, std::abs(q.value));
      if (is_cubic_example(c)) err = std::max(err, std::abs(q.value - cubic_example_psi(x, t)));
    }
    run.row(t, 0, 0, "cont_multiplier.max_abs", mag);
    run.row(t, 0, 0, "cont_multiplier.error_estimate", est, c.closed_form_tol);
    if (is_cubic_example(c)) run.row(t, 0, 0, "cont_multiplier.closed_form_error", err, c.closed_form_tol);
    run.check_clock("multiplier-scan");
  }
}

/// Sum of Gaussian bumps with seeded centres, widths and signs on the box [0, E)^d.
inline GridFunction martingale_input(const ExperimentConfig& c, double h) {
  const std::size_t d = c.gamma.size();
  const auto count = std::size_t(std::llround(c.mart_extent / h));
  std::mt19937_64 rng(c.seed + 11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RealPoint> centers;
  std::vector<double> widths, signs;
  for (std::size_t b = 0; b < c.mart_bumps; ++b) {
    RealPoint x(d);
    for (auto& v : x) v = (0.1 + 0.8 * u(rng)) * c.mart_extent;
    centers.push_back(std::move(x));
    widths.push_back((0.03 + 0.09 * u(rng)) * c.mart_extent);
    signs.push_back(u(rng) < 0.5 ? -1.0 : 1.0);
  }
  return GridFunction::sample(RealPoint(d, 0.0), std::vector<std::size_t>(d, count), h,
                              [&](const RealPoint& x) {
                                double v = 0;
                                for (std::size_t b = 0; b < centers.size(); ++b) {
                                  double r2 = 0;
                                  for (std::size_t g = 0; g < d; ++g) r2 += std::pow(x[g] - centers[b][g], 2);
                                  v += signs[b] * std::exp(-r2 / (2 * widths[b] * widths[b]));
                                }
                                return cplx(v);
                              });
}

inline void run_martingale_probe(const ExperimentConfig& c, Runner& run) {
  const DilationMatrix a(c.gamma);
  const ChristCubeSystem sys(a, c.mart_levels.front(), c.mart_levels.back(), c.mart_base);
  std::vector<double> scales, ratios;
  for (double h : {c.mart_h, c.mart_h / 2}) {
    const GridFunction f = martingale_input(c, h);
    if (double(f.size()) * double(c.mart_levels.size()) > double(c.budget_cells))
      throw budget_exceeded("martingale-probe: family exceeds the cell budget");
    const auto probe = martingale_oscillation_probe(f, c.mart_levels, sys, c.p, c.mart_n, c.strategy, c.restarts, c.seed);
    run.row(h, c.p, c.mart_n, "martingale_oscillation_probe.ratio", probe.ratio);
    scales.push_back(h);
    ratios.push_back(probe.ratio);
    run.check_clock("martingale-probe");
  }
  const auto [drift, slope] = drift_and_slope(scales, ratios);
  (void)slope;
  run.row(scales.back(), c.p, c.mart_n, "martingale_oscillation_probe.refinement_drift", drift, c.tol_drift);
  run.report().fits["refinement_drift"] = drift;
}

inline void run_split_check(const ExperimentConfig& c, Runner& run) {
  const CZKernel k = c.kernel();
  const ConvexBody omega = c.omega();
  const auto grid = TruncationGrid::log_spaced(c.t_min, c.t_max, c.t_count);
  for (std::int64_t m : c.half_widths) {
    LatticeFunction f = random_unit_input(c.gamma.size(), m, detail::splitmix64(c.seed ^ std::uint64_t(m)));
    if (c.input_kind == "zero")
      for (std::size_t j = 0; j < f.size(); ++j) f[j] = 0;
    const SampledFamily fam = radon_sampled_family(f, k, omega, c.gamma, grid, c.budget_cells);
    const SplitCheck s = split_check(fam, c.tau, c.n_blocks, c.p, c.strategy);
    run.row(double(m), c.p, c.n_blocks, "split_check.oscillation", s.oscillation);
    run.row(double(m), c.p, c.n_blocks, "split_check.long_oscillation", s.long_oscillation);
    run.row(double(m), c.p, c.n_blocks, "split_check.short_norm", s.short_norm);
    run.row(double(m), c.p, c.n_blocks, "split_check.ratio", s.ratio, c.split_c);
    run.check_clock("split-check");
  }
}

}  // namespace detail

/// Run one experiment. Budget overruns end the run early with the rows gathered so
/// far and `complete = false`; other errors propagate.
inline Report run_experiment(const ExperimentConfig& c) {
  const unsigned saved = thread_count();
  thread_count() = c.threads;
  detail::Runner run(c);
  try {
    if (c.experiment == "verify-kernel") detail::run_verify_kernel(c, run);
    else if (c.experiment == "probe-oscillation") detail::run_probe_oscillation(c, run);
    else if (c.experiment == "gauss-table") detail::run_gauss_table(c, run);
    else if (c.experiment == "multiplier-scan") detail::run_multiplier_scan(c, run);
    else if (c.experiment == "martingale-probe") detail::run_martingale_probe(c, run);
    else if (c.experiment == "split-check") detail::run_split_check(c, run);
    else throw usage_error("field 'experiment': unknown experiment '" + c.experiment + "'");
  } catch (const budget_exceeded& e) {
    run.report().complete = false;
    run.report().note = e.what();
  } catch (...) {
    thread_count() = saved;
    throw;
  }
  thread_count() = saved;
  run.report().timings["total"] = run.elapsed();
  return run.report();
}

}  // namespace radonlab
