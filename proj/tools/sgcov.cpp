// sgcov: coverage probability curves for Poisson cellular networks.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgcov/cli.hpp"

#ifndef SGCOV_DATA_DIR
#define SGCOV_DATA_DIR "data/reference"
#endif

namespace {

using sgcov::cli::RunConfig;

// Flag values are collected separately so that only flags given on the
// command line override the --config file.
struct Flags {
  std::string config;
  std::string mode, method, format, out;
  double alpha = 0, lambda = 0, side = 0, xi_min = 0, xi_max = 0, xi_step = 0;
  std::vector<double> epsilons, lambdas;
  std::uint64_t realizations = 0, seed = 0;
  std::size_t workers = 0;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool with_lambdas) {
  cmd->add_option("--config", f.config, "JSON file with RunConfig fields");
  cmd->add_option("--mode", f.mode, "dl or ul");
  cmd->add_option("--method", f.method, "analytic, sim or both");
  cmd->add_option("--alpha", f.alpha, "path-loss exponent (> 2)");
  cmd->add_option("--epsilon", f.epsilons, "power-control factor, repeatable")->allow_extra_args(false);
  cmd->add_option("--lambda", f.lambda, "BS density per m^2");
  cmd->add_option("--side", f.side, "simulation window side in metres");
  cmd->add_option("--xi-min", f.xi_min, "lowest SIR threshold in dB");
  cmd->add_option("--xi-max", f.xi_max, "highest SIR threshold in dB");
  cmd->add_option("--xi-step", f.xi_step, "threshold step in dB");
  cmd->add_option("--realizations", f.realizations, "Monte Carlo realizations");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output file (default: standard output)");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_option("--workers", f.workers, "worker threads");
  if (with_lambdas)
    cmd->add_option("--lambdas", f.lambdas, "densities to compare, repeatable")->allow_extra_args(false);
}

RunConfig resolve(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = sgcov::cli::load_config_file(f.config, cfg);
  auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (given("--mode")) cfg.mode = sgcov::cli::parse_mode(f.mode);
  if (given("--method")) cfg.method = sgcov::cli::parse_method(f.method);
  if (given("--format")) cfg.format = sgcov::cli::parse_format(f.format);
  if (given("--out")) cfg.out = f.out;
  if (given("--alpha")) cfg.alpha = f.alpha;
  if (given("--epsilon")) cfg.epsilons = f.epsilons;
  if (given("--lambda")) cfg.lambda = f.lambda;
  if (given("--side")) cfg.side = f.side;
  if (given("--xi-min")) cfg.xi_min_db = f.xi_min;
  if (given("--xi-max")) cfg.xi_max_db = f.xi_max;
  if (given("--xi-step")) cfg.xi_step_db = f.xi_step;
  if (given("--realizations")) cfg.realizations = f.realizations;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--workers")) cfg.workers = f.workers;
  if (cmd->get_option_no_throw("--lambdas") && given("--lambdas")) cfg.lambdas = f.lambdas;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage probability of Poisson cellular networks"};
  app.require_subcommand(1);

  Flags curve_flags;
  auto* curve = app.add_subcommand("curve", "coverage probability over an SIR threshold grid");
  add_run_flags(curve, curve_flags, false);

  Flags inv_flags;
  auto* invariance =
      app.add_subcommand("validate-invariance", "check that coverage does not depend on density");
  add_run_flags(invariance, inv_flags, true);

  sgcov::cli::FigureOptions fig;
  std::string fig_out = ".";
  std::string data_dir = SGCOV_DATA_DIR;
  auto* figures = app.add_subcommand("reproduce-figures",
                                     "regenerate the alpha 4/6 DL and UL curves and compare them "
                                     "with the reference dataset");
  figures->add_option("--out", fig_out, "output directory");
  figures->add_option("--data-dir", data_dir, "directory holding the reference dataset");
  figures->add_option("--realizations", fig.realizations, "Monte Carlo realizations");
  figures->add_option("--seed", fig.seed, "master seed");
  figures->add_option("--workers", fig.workers, "worker threads");
  figures->add_flag("!--no-sim", fig.simulate, "skip the simulated curves");

  CLI11_PARSE(app, argc, argv);

  try {
    if (curve->parsed()) {
      const RunConfig cfg = resolve(curve, curve_flags);
      const auto run = sgcov::cli::cmd_curve(cfg);
      if (cfg.out.empty()) {
        std::cout << sgcov::cli::render(run, cfg.format);
      } else {
        sgcov::cli::write_outputs(run, cfg);
      }
      for (const auto& w : run.metadata.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    if (invariance->parsed()) {
      const RunConfig cfg = resolve(invariance, inv_flags);
      const auto report = sgcov::cli::cmd_validate_invariance(cfg);
      std::cout << report.text();
      if (!cfg.out.empty()) sgcov::cli::write_text(cfg.out, report.text());
      return report.pass ? 0 : 1;
    }
    if (figures->parsed()) {
      fig.out_dir = fig_out;
      fig.data_dir = data_dir;
      const auto report = sgcov::cli::cmd_reproduce_figures(fig);
      std::cout << report.text();
      return report.pass() ? 0 : 1;
    }
  } catch (const sgcov::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
