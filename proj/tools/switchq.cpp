#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "switchq/switchq.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  switchq::CliOverrides overrides;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.overrides.out_dir, "output directory");
  cmd->add_option("--seed", args.overrides.seed, "random seed override");
  cmd->add_option("--trials", args.overrides.trials, "Monte Carlo trials override");
  cmd->add_option("--steps", args.overrides.steps, "RK4 step count override");
  cmd->add_option("--format", args.overrides.format, "output format: csv or json");
}

int run_command(const CommonArgs& args,
                const std::function<std::vector<std::string>(const switchq::ExperimentConfig&)>&
                    command) {
  switchq::ExperimentConfig cfg = switchq::load_config(args.config_path);
  switchq::apply_overrides(cfg, args.overrides);
  for (const auto& file : command(cfg)) std::cout << "wrote " << file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"switchq: Markov-switched infinite-server queues with fat-tailed services"};
  app.require_subcommand(1);
  app.set_version_flag("--version", switchq::kVersion);

  CommonArgs solve_args, limit_args, series_args, sweep_args, simulate_args;
  auto* solve = app.add_subcommand("solve", "exact transform of the (rescaled) process");
  add_common_flags(solve, solve_args);
  auto* limit = app.add_subcommand("limit", "limit transform for the classified regime");
  add_common_flags(limit, limit_args);
  auto* series = app.add_subcommand("series", "power-series transform for rational alpha");
  add_common_flags(series, series_args);
  auto* sweep = app.add_subcommand("sweep", "prelimit-to-limit convergence table");
  add_common_flags(sweep, sweep_args);
  auto* simulate = app.add_subcommand("simulate", "empirical transform by path simulation");
  add_common_flags(simulate, simulate_args);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  verify->add_option("suite", suite, "suite name (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_command(solve_args, switchq::cmd_solve);
    if (limit->parsed()) return run_command(limit_args, switchq::cmd_limit);
    if (series->parsed()) return run_command(series_args, switchq::cmd_series);
    if (sweep->parsed()) return run_command(sweep_args, switchq::cmd_sweep);
    if (simulate->parsed()) return run_command(simulate_args, switchq::cmd_simulate);
    if (verify->parsed()) return switchq::cmd_verify(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
