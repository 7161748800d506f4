#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>

#include "sgcov/cli.hpp"

using namespace sgcov;
using namespace sgcov::cli;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgcov_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

RunConfig analytic_config() {
  RunConfig cfg;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST(Config, DefaultsAreValid) { EXPECT_NO_THROW(RunConfig{}.validate()); }

TEST(Config, ErrorsNameTheField) {
  auto bad = [](auto mutate) {
    return [mutate] {
      RunConfig c;
      mutate(c);
      c.validate();
    };
  };
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.alpha = 2.0; })), "alpha");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.epsilons = {1.5}; })), "epsilon");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.epsilons.clear(); })), "epsilon");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.lambda = 0.0; })), "lambda");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.side = -5.0; })), "side");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.xi_step_db = 0.0; })), "xi-step");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.xi_min_db = 20.0; })), "xi-min");
  EXPECT_EQ(field_of(bad([](RunConfig& c) {
              c.method = RunMethod::Sim;
              c.realizations = 0;
            })),
            "realizations");
  EXPECT_EQ(field_of(bad([](RunConfig& c) { c.workers = 0; })), "workers");
  EXPECT_EQ(field_of([] { parse_mode("both"); }), "mode");
  EXPECT_EQ(field_of([] { parse_method("exact"); }), "method");
  EXPECT_EQ(field_of([] { parse_format("xml"); }), "format");
}

TEST(Config, JsonAppliesOnlyPresentFields) {
  RunConfig cfg;
  apply_json(cfg, nlohmann::json::parse(R"({"mode":"ul","alpha":6,"epsilon":[0,1],"seed":9})"));
  EXPECT_EQ(cfg.mode, LinkMode::Uplink);
  EXPECT_EQ(cfg.alpha, 6.0);
  EXPECT_EQ(cfg.epsilons, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.lambda, 1e-5);
  apply_json(cfg, nlohmann::json::parse(R"({"epsilon":0.5})"));
  EXPECT_EQ(cfg.epsilons, (std::vector<double>{0.5}));
  EXPECT_EQ(field_of([&] { apply_json(cfg, nlohmann::json::parse(R"({"alpha":"four"})")); }), "alpha");
  EXPECT_EQ(field_of([&] { apply_json(cfg, nlohmann::json::parse("[1,2]")); }), "config");
}

TEST(Config, FileLoading) {
  const fs::path dir = scratch_dir("config");
  write_text(dir / "c.json", R"({"xi_min": -3, "xi_max": 3, "format": "json"})");
  const RunConfig cfg = load_config_file((dir / "c.json").string());
  EXPECT_EQ(cfg.xi_min_db, -3.0);
  EXPECT_EQ(cfg.format, OutputFormat::Json);
  write_text(dir / "broken.json", "{not json");
  EXPECT_EQ(field_of([&] { load_config_file((dir / "broken.json").string()); }), "config");
  EXPECT_EQ(field_of([&] { load_config_file((dir / "missing.json").string()); }), "config");
}

TEST(Csv, RoundTripAndIdempotence) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CurveRecord> recs;
    for (int i = 0; i < 10; ++i) {
      CurveRecord r;
      r.xi_db = -15.0 + 3.3 * i;
      r.epsilon = coin(gen) ? 0.0 : p(gen);
      if (coin(gen)) r.p_analytic = p(gen);
      if (coin(gen)) {
        r.p_sim = p(gen);
        r.stderr_ = p(gen) * 0.01;
      }
      r.method = "analytic_general";
      recs.push_back(r);
    }
    const std::string text = format_csv(recs);
    const auto back = parse_csv(text);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], rounded(recs[i]));
    EXPECT_EQ(format_csv(back), text);
  }
}

TEST(Csv, RejectsBadInput) {
  EXPECT_THROW(parse_csv("a,b\n"), ConfigError);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"), ConfigError);
}

TEST(Json, RecordsAndMetadata) {
  RunConfig cfg = analytic_config();
  cfg.xi_min_db = cfg.xi_max_db = 0.0;
  const auto run = cmd_curve(cfg);
  const auto j = nlohmann::json::parse(render(run, OutputFormat::Json));
  ASSERT_EQ(j["records"].size(), 1u);
  EXPECT_NEAR(j["records"][0]["p_analytic"].get<double>(), 0.560099, 1e-6);
  EXPECT_TRUE(j["records"][0]["p_sim"].is_null());
  EXPECT_FALSE(j["metadata"].contains("wall_time_s"));
  EXPECT_EQ(j["metadata"]["master_seed"], 42);
}

TEST(Curve, DefaultDownlink) {
  const auto run = cmd_curve(analytic_config());
  ASSERT_EQ(run.records.size(), 31u);
  EXPECT_EQ(run.records.front().xi_db, -15.0);
  EXPECT_EQ(run.records[15].xi_db, 0.0);
  EXPECT_NEAR(*run.records[15].p_analytic, 0.5601, 1e-4);
  EXPECT_EQ(run.records[15].method, "analytic_closed_form");
  EXPECT_FALSE(run.records[15].p_sim.has_value());
}

TEST(Curve, SingleThreshold) {
  RunConfig cfg = analytic_config();
  cfg.xi_min_db = cfg.xi_max_db = 3.0;
  EXPECT_EQ(cmd_curve(cfg).records.size(), 1u);
}

TEST(Curve, UplinkSeveralEpsilons) {
  RunConfig cfg = analytic_config();
  cfg.mode = LinkMode::Uplink;
  cfg.alpha = 6.0;
  cfg.epsilons = {0.0, 1.0};
  cfg.xi_step_db = 5.0;
  const auto run = cmd_curve(cfg);
  ASSERT_EQ(run.records.size(), 14u);
  EXPECT_EQ(run.records[0].epsilon, 0.0);
  EXPECT_EQ(run.records[7].epsilon, 1.0);
  EXPECT_EQ(*run.records[3].p_analytic,
            round_sig(ul_coverage_eps0(SirThreshold::from_db(0.0), 3.0), 6));
}

TEST(Curve, BothMethodsSideBySide) {
  RunConfig cfg = analytic_config();
  cfg.method = RunMethod::Both;
  cfg.realizations = 200;
  cfg.xi_step_db = 5.0;
  const auto run = cmd_curve(cfg);
  for (const auto& r : run.records) {
    EXPECT_TRUE(r.p_analytic && r.p_sim && r.stderr_);
    EXPECT_EQ(r.method, "analytic_closed_form+simulated");
  }
  EXPECT_EQ(run.metadata.n_realizations, 200u);
}

TEST(Curve, OutputIsByteIdenticalAcrossWorkers) {
  RunConfig cfg = analytic_config();
  cfg.mode = LinkMode::Uplink;
  cfg.method = RunMethod::Both;
  cfg.realizations = 150;
  cfg.epsilons = {0.0, 1.0};
  cfg.xi_step_db = 3.0;
  const std::string one = render(cmd_curve(cfg), OutputFormat::Csv);
  cfg.workers = 8;
  const auto eight = cmd_curve(cfg);
  EXPECT_EQ(render(eight, OutputFormat::Csv), one);
  EXPECT_EQ(render(eight, OutputFormat::Json), render(cmd_curve(cfg), OutputFormat::Json));
}

TEST(Curve, OutputsWithSidecar) {
  const fs::path dir = scratch_dir("outputs");
  RunConfig cfg = analytic_config();
  cfg.out = (dir / "dl.csv").string();
  cfg.xi_step_db = 5.0;
  write_outputs(cmd_curve(cfg), cfg);
  const auto recs = parse_csv(slurp(dir / "dl.csv"));
  EXPECT_EQ(recs.size(), 7u);
  const auto meta = nlohmann::json::parse(slurp(dir / "dl.csv.meta.json"));
  EXPECT_TRUE(meta.contains("wall_time_s"));
  EXPECT_EQ(meta["lambda"], 1e-5);
}

TEST(Reference, DatasetShape) {
  const auto ref = load_reference(fs::path(SGCOV_DATA_DIR) / kReferenceFile);
  EXPECT_EQ(ref.size(), 152u);
  for (LinkMode link : {LinkMode::Downlink, LinkMode::Uplink})
    for (double alpha : {4.0, 6.0}) {
      EXPECT_EQ(reference_curve(ref, link, alpha, false).size(), 31u);
      EXPECT_EQ(reference_curve(ref, link, alpha, true).size(), 7u);
    }
}

TEST(Reference, UplinkCurveIdentity) {
  // The alpha = 4 reference curve is the one closest to the si/ci value at 0 dB.
  const auto ref = load_reference(fs::path(SGCOV_DATA_DIR) / kReferenceFile);
  const auto at0 = [&](double alpha) {
    for (const auto& p : reference_curve(ref, LinkMode::Uplink, alpha, false))
      if (p.xi_db == 0.0) return p.p;
    return -1.0;
  };
  const double si_ci = ul_coverage_eps0_alpha4(SirThreshold::from_db(0.0));
  EXPECT_LT(std::abs(at0(4.0) - si_ci), std::abs(at0(6.0) - si_ci));
}

TEST(Reference, MissingDatasetIsConfigError) {
  EXPECT_EQ(field_of([] { load_reference("/nonexistent/ref.csv"); }), "data-dir");
}

TEST(ReproduceFigures, AnalyticOnly) {
  FigureOptions opt;
  opt.out_dir = scratch_dir("figures");
  opt.data_dir = SGCOV_DATA_DIR;
  opt.simulate = false;
  opt.workers = 1;
  const auto report = cmd_reproduce_figures(opt);
  ASSERT_EQ(report.curves.size(), 4u);
  EXPECT_TRUE(report.curves[0].pass());  // dl alpha 4
  EXPECT_TRUE(report.curves[1].pass());  // dl alpha 6
  for (const auto& c : report.curves) EXPECT_EQ(c.points, 31u);
  const std::string dl = slurp(opt.out_dir / "dl_coverage.csv");
  EXPECT_EQ(dl.substr(0, dl.find('\n')), std::string("alpha,") + kCsvHeader);
  EXPECT_TRUE(fs::exists(opt.out_dir / "ul_coverage.csv"));
  EXPECT_EQ(slurp(opt.out_dir / "comparison.txt"), report.text());
}
