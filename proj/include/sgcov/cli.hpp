#pragma once

// Experiment harness behind the sgcov command-line tool: run configuration,
// curve records with their CSV/JSON encodings, the reference dataset, and
// the three commands (curve, validate-invariance, reproduce-figures).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgcov/coverage.hpp"
#include "sgcov/errors.hpp"
#include "sgcov/montecarlo.hpp"
#include "sgcov/params.hpp"
#include "sgcov/spatial.hpp"

namespace sgcov::cli {

enum class RunMethod { Analytic, Sim, Both };
enum class OutputFormat { Csv, Json };

struct RunConfig {
  LinkMode mode = LinkMode::Downlink;
  RunMethod method = RunMethod::Analytic;
  double alpha = 4.0;
  std::vector<double> epsilons{0.0};
  double lambda = 1e-5;
  double side = 2000.0;
  double xi_min_db = -15.0;
  double xi_max_db = 15.0;
  double xi_step_db = 1.0;
  std::uint64_t realizations = 3000;
  std::uint64_t seed = 42;
  std::string out;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
  std::size_t workers = default_workers();
  std::vector<double> lambdas{1e-6, 1e-4};  // validate-invariance only

  bool wants_analytic() const { return method != RunMethod::Sim; }
  bool wants_sim() const { return method != RunMethod::Analytic; }

  void validate() const {
    if (!(alpha > 2.0) || !std::isfinite(alpha)) throw ConfigError("alpha", "must exceed 2");
    if (epsilons.empty()) throw ConfigError("epsilon", "at least one value required");
    for (double e : epsilons)
      if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon", "values must lie in [0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be positive");
    if (!(side > 0.0) || !std::isfinite(side)) throw ConfigError("side", "must be positive");
    if (!(xi_step_db > 0.0)) throw ConfigError("xi-step", "must be positive");
    if (!(xi_min_db <= xi_max_db)) throw ConfigError("xi-min", "must not exceed xi-max");
    if (wants_sim() && realizations < 1) throw ConfigError("realizations", "must be >= 1");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    for (double l : lambdas)
      if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambdas", "must be positive");
  }

  NetworkParams params(double epsilon = 0.0) const {
    return NetworkParams(lambda, alpha, epsilon);
  }
  ThresholdGrid grid() const { return make_db_grid(xi_min_db, xi_max_db, xi_step_db); }
};

inline LinkMode parse_mode(const std::string& s) {
  if (s == "dl") return LinkMode::Downlink;
  if (s == "ul") return LinkMode::Uplink;
  throw ConfigError("mode", "expected dl or ul, got '" + s + "'");
}

inline RunMethod parse_method(const std::string& s) {
  if (s == "analytic") return RunMethod::Analytic;
  if (s == "sim") return RunMethod::Sim;
  if (s == "both") return RunMethod::Both;
  throw ConfigError("method", "expected analytic, sim or both, got '" + s + "'");
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("format", "expected csv or json, got '" + s + "'");
}

/// Applies the fields present in a JSON object; absent fields keep their values.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  auto number = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw ConfigError(key, "must be a number");
    target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
  };
  auto numbers = [&](const char* key, std::vector<double>& target) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number()) {
      target = {v.get<double>()};
    } else if (v.is_array()) {
      target.clear();
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(key, "array entries must be numbers");
        target.push_back(e.get<double>());
      }
    } else {
      throw ConfigError(key, "must be a number or an array of numbers");
    }
  };
  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j.at(key).is_string()) throw ConfigError(key, "must be a string");
    return j.at(key).get<std::string>();
  };

  if (auto s = text("mode")) cfg.mode = parse_mode(*s);
  if (auto s = text("method")) cfg.method = parse_method(*s);
  if (auto s = text("format")) cfg.format = parse_format(*s);
  if (auto s = text("out")) cfg.out = *s;
  number("alpha", cfg.alpha);
  numbers("epsilon", cfg.epsilons);
  number("lambda", cfg.lambda);
  number("side", cfg.side);
  number("xi_min", cfg.xi_min_db);
  number("xi_max", cfg.xi_max_db);
  number("xi_step", cfg.xi_step_db);
  number("realizations", cfg.realizations);
  number("seed", cfg.seed);
  number("workers", cfg.workers);
  numbers("lambdas", cfg.lambdas);
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  apply_json(base, j);
  return base;
}

// --- records ----------------------------------------------------------------

struct CurveRecord {
  double xi_db = 0.0;
  std::optional<double> p_analytic;
  std::optional<double> p_sim;
  std::optional<double> stderr_;
  double epsilon = 0.0;
  std::string method;  // '+'-joined method tags

  friend bool operator==(const CurveRecord&, const CurveRecord&) = default;
};

inline std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Rounds to the precision the CSV encoding keeps.
inline double round_sig(double v, int digits) { return std::stod(format_sig(v, digits)); }

inline CurveRecord rounded(CurveRecord r) {
  r.xi_db = round_sig(r.xi_db, 6);
  r.epsilon = round_sig(r.epsilon, 6);
  if (r.p_analytic) r.p_analytic = round_sig(*r.p_analytic, 6);
  if (r.p_sim) r.p_sim = round_sig(*r.p_sim, 6);
  if (r.stderr_) r.stderr_ = round_sig(*r.stderr_, 3);
  return r;
}

inline constexpr const char* kCsvHeader = "xi_db,epsilon,p_analytic,p_sim,stderr,method";

inline std::string format_csv(const std::vector<CurveRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  auto opt = [](const std::optional<double>& v, int digits) {
    return v ? format_sig(*v, digits) : std::string();
  };
  for (const auto& r : records) {
    out += format_sig(r.xi_db, 6) + "," + format_sig(r.epsilon, 6) + "," + opt(r.p_analytic, 6) +
           "," + opt(r.p_sim, 6) + "," + opt(r.stderr_, 3) + "," + r.method + "\n";
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::vector<CurveRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ConfigError("csv", "missing or unexpected header");
  std::vector<CurveRecord> records;
  auto opt = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw ConfigError("csv", "expected 6 fields in '" + line + "'");
    records.push_back({std::stod(f[0]), opt(f[2]), opt(f[3]), opt(f[4]), std::stod(f[1]), f[5]});
  }
  return records;
}

inline nlohmann::json metadata_json(const RunMetadata& m, bool with_wall_time) {
  nlohmann::json j;
  j["master_seed"] = m.master_seed;
  j["n_realizations"] = m.n_realizations;
  j["discards"] = m.discards_by_reason;
  j["window_side"] = m.window_side;
  j["lambda"] = m.lambda;
  j["alpha"] = m.alpha;
  j["epsilon"] = m.epsilons;
  j["warnings"] = m.warnings;
  if (with_wall_time) j["wall_time_s"] = m.wall_time_s;
  return j;
}

/// Records plus the deterministic part of the run metadata. Wall time is
/// left out so identical runs produce identical files.
inline std::string format_json(const std::vector<CurveRecord>& records, const RunMetadata& meta) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const auto& raw : records) {
    const CurveRecord r = rounded(raw);
    nlohmann::json o;
    o["xi_db"] = r.xi_db;
    o["epsilon"] = r.epsilon;
    o["p_analytic"] = r.p_analytic ? nlohmann::json(*r.p_analytic) : nlohmann::json(nullptr);
    o["p_sim"] = r.p_sim ? nlohmann::json(*r.p_sim) : nlohmann::json(nullptr);
    o["stderr"] = r.stderr_ ? nlohmann::json(*r.stderr_) : nlohmann::json(nullptr);
    o["method"] = r.method;
    j["records"].push_back(o);
  }
  j["metadata"] = metadata_json(meta, false);
  return j.dump(2) + "\n";
}

// --- curve ------------------------------------------------------------------

struct CurveRun {
  std::vector<CurveRecord> records;
  RunMetadata metadata;
};

inline std::string join_tags(const std::vector<std::string_view>& tags) {
  std::string s;
  for (auto t : tags) {
    if (!s.empty()) s += '+';
    s += t;
  }
  return s;
}

/// One record per (threshold, epsilon), analytic and simulated values side
/// by side when both are requested. Downlink uses a single epsilon of 0.
inline CurveRun cmd_curve(const RunConfig& cfg) {
  cfg.validate();
  const ThresholdGrid grid = cfg.grid();
  const std::vector<double> eps =
      cfg.mode == LinkMode::Downlink ? std::vector<double>{0.0} : cfg.epsilons;
  const double kappa = cfg.alpha / 2.0;

  CurveRun run;
  std::vector<std::vector<CoveragePoint>> analytic;
  if (cfg.wants_analytic())
    for (double e : eps) analytic.push_back(coverage_curve(cfg.mode, grid, kappa, e, cfg.workers));

  std::optional<SweepResult> sim;
  const SimWindow window(cfg.side);
  if (cfg.wants_sim()) {
    sim = run_sweep(cfg.mode, cfg.params(), window, grid, eps, cfg.realizations, cfg.seed,
                    cfg.workers);
    run.metadata = sim->metadata;
  } else {
    run.metadata.lambda = cfg.lambda;
    run.metadata.alpha = cfg.alpha;
    run.metadata.window_side = cfg.side;
    run.metadata.master_seed = cfg.seed;
    if (cfg.mode == LinkMode::Uplink) run.metadata.epsilons = eps;
  }

  for (std::size_t e = 0; e < eps.size(); ++e) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CurveRecord r;
      r.xi_db = grid[j].db();
      r.epsilon = eps[e];
      std::vector<std::string_view> tags;
      if (!analytic.empty()) {
        r.p_analytic = analytic[e][j].probability;
        tags.push_back(to_string(analytic[e][j].method));
      }
      if (sim) {
        const EstimatorResult& est = sim->estimates[e][j];
        if (std::isnan(est.p_hat))
          throw Error("curve: every realization was discarded, no estimate available");
        r.p_sim = est.p_hat;
        r.stderr_ = est.stderr_;
        tags.push_back(to_string(Method::Simulated));
      }
      r.method = join_tags(tags);
      run.records.push_back(rounded(r));
    }
  }
  return run;
}

inline std::string render(const CurveRun& run, OutputFormat format) {
  return format == OutputFormat::Csv ? format_csv(run.records)
                                     : format_json(run.records, run.metadata);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

/// Writes the results file and, next to it, <out>.meta.json with the full
/// run metadata including wall time.
inline void write_outputs(const CurveRun& run, const RunConfig& cfg) {
  write_text(cfg.out, render(run, cfg.format));
  write_text(cfg.out + ".meta.json", metadata_json(run.metadata, true).dump(2) + "\n");
}

// --- validate-invariance ----------------------------------------------------

struct InvarianceReport {
  double analytic_max_gap = 0.0;
  double analytic_tolerance = 0.0;
  bool analytic_pass = false;
  std::optional<InvarianceResult> simulated;
  bool pass = false;

  std::string text() const {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific;
    os << "analytic max pairwise gap " << analytic_max_gap << " (tolerance " << analytic_tolerance
       << "): " << (analytic_pass ? "PASS" : "FAIL") << "\n";
    if (simulated)
      os << "simulated max pairwise gap " << simulated->max_gap << " (bound "
         << simulated->noise_bound << "): " << (simulated->within_bound ? "PASS" : "FAIL") << "\n";
    os << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
    return os.str();
  }
};

/// Evaluates the density-carrying analytic forms at every density in
/// cfg.lambdas and, when simulation is requested, the Monte Carlo
/// density-invariance experiment. Uplink uses the first epsilon.
inline InvarianceReport cmd_validate_invariance(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.lambdas.size() < 2) throw ConfigError("lambdas", "need at least two densities");
  const ThresholdGrid grid = cfg.grid();
  const double epsilon = cfg.mode == LinkMode::Downlink ? 0.0 : cfg.epsilons.front();

  InvarianceReport report;
  report.analytic_tolerance = cfg.mode == LinkMode::Downlink ? 1e-6 : 1e-5;
  std::vector<double> gaps(grid.size(), 0.0);
  parallel_for(grid.size(), cfg.workers, [&](std::size_t, std::size_t j) {
    std::vector<double> values;
    for (double l : cfg.lambdas) {
      const NetworkParams p(l, cfg.alpha, epsilon);
      values.push_back(cfg.mode == LinkMode::Downlink ? dl_coverage_with_density(grid[j], p)
                                                      : ul_coverage_with_density(grid[j], p));
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    gaps[j] = *hi - *lo;
  });
  report.analytic_max_gap = *std::max_element(gaps.begin(), gaps.end());
  report.analytic_pass = report.analytic_max_gap <= report.analytic_tolerance;
  report.pass = report.analytic_pass;

  if (cfg.wants_sim()) {
    report.simulated = density_invariance_experiment(cfg.mode, cfg.alpha / 2.0, epsilon, grid,
                                                     cfg.lambdas, cfg.realizations, cfg.seed,
                                                     cfg.workers);
    report.pass = report.pass && report.simulated->within_bound;
  }
  return report;
}

// --- reference dataset and reproduce-figures --------------------------------

struct ReferencePoint {
  LinkMode link;
  double alpha;
  double epsilon;
  bool simulated;
  double xi_db;
  double p;
  std::string source;
};

inline std::vector<ReferencePoint> load_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data-dir", "cannot open reference dataset '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "link,alpha,epsilon,kind,xi_db,p,source")
    throw ConfigError("data-dir", "unexpected reference dataset header");
  std::vector<ReferencePoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ConfigError("data-dir", "bad reference record '" + line + "'");
    points.push_back({parse_mode(f[0]), std::stod(f[1]), std::stod(f[2]), f[3] == "simulated",
                      std::stod(f[4]), std::stod(f[5]), f[6]});
  }
  return points;
}

inline constexpr const char* kReferenceFile = "coverage_curves_v1.csv";

/// Published analytic reference values for one curve, ordered by threshold.
inline std::vector<ReferencePoint> reference_curve(const std::vector<ReferencePoint>& all,
                                                   LinkMode link, double alpha, bool simulated) {
  std::vector<ReferencePoint> out;
  for (const auto& p : all)
    if (p.link == link && p.alpha == alpha && p.simulated == simulated) out.push_back(p);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.xi_db < b.xi_db; });
  return out;
}

struct CurveComparison {
  LinkMode link;
  double alpha;
  double tolerance;
  std::size_t points = 0;
  double max_abs_deviation = 0.0;
  double mean_signed_deviation = 0.0;  // ours minus reference
  std::size_t outside = 0;
  double sim_max_abs_deviation = 0.0;  // our simulation vs published simulation
  bool pass() const { return points > 0 && outside == 0; }
};

struct FigureReport {
  std::vector<CurveComparison> curves;
  bool pass() const {
    return std::all_of(curves.begin(), curves.end(), [](const auto& c) { return c.pass(); });
  }
  std::string text() const {
    std::ostringstream os;
    char buf[256];
    for (const auto& c : curves) {
      std::snprintf(buf, sizeof buf,
                    "%s alpha=%g: %zu points, max |dev| %.3e, mean dev %+.3e, tolerance %.1e, "
                    "%zu outside, sim max |dev| %.3e: %s\n",
                    c.link == LinkMode::Downlink ? "dl" : "ul", c.alpha, c.points,
                    c.max_abs_deviation, c.mean_signed_deviation, c.tolerance, c.outside,
                    c.sim_max_abs_deviation, c.pass() ? "PASS" : "FAIL");
      os << buf;
    }
    os << "verdict: " << (pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }
};

/// Analytic tolerance against the published plot data, per link.
inline double figure_tolerance(LinkMode link) { return link == LinkMode::Downlink ? 5e-4 : 1e-3; }

inline CurveComparison compare_curve(LinkMode link, double alpha,
                                     const std::vector<CurveRecord>& records,
                                     const std::vector<ReferencePoint>& reference) {
  CurveComparison c{link, alpha, figure_tolerance(link)};
  auto find = [&](double xi_db) -> const CurveRecord* {
    for (const auto& r : records)
      if (std::abs(r.xi_db - xi_db) < 1e-9) return &r;
    return nullptr;
  };
  double signed_sum = 0.0;
  for (const auto& ref : reference_curve(reference, link, alpha, false)) {
    const CurveRecord* r = find(ref.xi_db);
    if (!r || !r->p_analytic) continue;
    const double d = *r->p_analytic - ref.p;
    ++c.points;
    signed_sum += d;
    c.max_abs_deviation = std::max(c.max_abs_deviation, std::abs(d));
    if (std::abs(d) > c.tolerance) ++c.outside;
  }
  if (c.points > 0) c.mean_signed_deviation = signed_sum / static_cast<double>(c.points);
  for (const auto& ref : reference_curve(reference, link, alpha, true)) {
    const CurveRecord* r = find(ref.xi_db);
    if (r && r->p_sim) c.sim_max_abs_deviation = std::max(c.sim_max_abs_deviation, std::abs(*r->p_sim - ref.p));
  }
  return c;
}

/// Figure CSV: the curve columns prefixed by alpha.
inline std::string format_figure_csv(const std::vector<std::pair<double, CurveRun>>& curves) {
  std::string out = std::string("alpha,") + kCsvHeader + "\n";
  for (const auto& [alpha, run] : curves) {
    const std::string body = format_csv(run.records);
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) out += format_sig(alpha, 6) + "," + line + "\n";
  }
  return out;
}

struct FigureOptions {
  std::filesystem::path out_dir = ".";
  std::filesystem::path data_dir;
  std::uint64_t realizations = 3000;
  std::uint64_t seed = 42;
  double lambda = 1e-5;
  double side = 2000.0;
  std::size_t workers = default_workers();
  bool simulate = true;
};

/// Regenerates the downlink and uplink (epsilon = 0) curves for alpha 4 and
/// 6, writes dl_coverage.csv, ul_coverage.csv and comparison.txt into
/// out_dir, and compares the analytic values with the reference dataset.
inline FigureReport cmd_reproduce_figures(const FigureOptions& opt) {
  const auto reference = load_reference(opt.data_dir / kReferenceFile);
  std::filesystem::create_directories(opt.out_dir);
  FigureReport report;
  for (LinkMode link : {LinkMode::Downlink, LinkMode::Uplink}) {
    std::vector<std::pair<double, CurveRun>> curves;
    for (double alpha : {4.0, 6.0}) {
      RunConfig cfg;
      cfg.mode = link;
      cfg.method = opt.simulate ? RunMethod::Both : RunMethod::Analytic;
      cfg.alpha = alpha;
      cfg.epsilons = {0.0};
      cfg.lambda = opt.lambda;
      cfg.side = opt.side;
      cfg.realizations = opt.realizations;
      cfg.seed = opt.seed;
      cfg.workers = opt.workers;
      CurveRun run = cmd_curve(cfg);
      report.curves.push_back(compare_curve(link, alpha, run.records, reference));
      curves.emplace_back(alpha, std::move(run));
    }
    const char* name = link == LinkMode::Downlink ? "dl_coverage.csv" : "ul_coverage.csv";
    write_text(opt.out_dir / name, format_figure_csv(curves));
  }
  write_text(opt.out_dir / "comparison.txt", report.text());
  return report;
}

}  // namespace sgcov::cli
