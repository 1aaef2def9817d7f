#include "lqrpg/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Data-driven policy gradient toolkit for the stochastic LQR"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false, runs_set = false, iters_set = false;
  int runs = 0;
  std::int64_t iters = 0;

  const std::vector<std::string> experiments = {
      "oracle-indirect", "oracle-direct", "sgd-synthetic",
      "pg-indirect",     "pg-direct",     "constants"};
  for (const auto& name : experiments) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--preset", preset,
                    "preset when no config file is given "
                    "(scalar|benchmark3|boeing747)");
    sub->add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--runs", runs, "Monte-Carlo run count override")
        ->each([&](const std::string&) { runs_set = true; });
    sub->add_option("--iters", iters, "iteration count override")
        ->each([&](const std::string&) { iters_set = true; });
    sub->add_option("--out", out_dir, "output directory override");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string experiment = app.get_subcommands().front()->get_name();

  lqrpg::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = lqrpg::load_config(config_path);
      if (cfg.experiment != lqrpg::experiment_from_string(experiment) &&
          !experiment.empty()) {
        // The subcommand wins over the config's experiment field.
        std::string json = "{\"experiment\": \"" + experiment + "\"}";
        lqrpg::ExperimentConfig base = lqrpg::parse_config(json);
        base = cfg;
        base.experiment = lqrpg::experiment_from_string(experiment);
        cfg = base;
      }
    } else {
      std::string json = "{\"experiment\": \"" + experiment + "\"";
      if (!preset.empty()) json += ", \"preset\": \"" + preset + "\"";
      json += "}";
      cfg = lqrpg::parse_config(json);
    }
    if (seed_set) cfg.master_seed = seed;
    if (runs_set) cfg.runs = runs;
    if (iters_set) cfg.iters = iters;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (cfg.runs < 1 || cfg.iters < 1)
      throw lqrpg::ConfigError("runs and iters must be >= 1");
  } catch (const lqrpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto paths = lqrpg::run_experiment(cfg);
    for (const auto& p : paths) std::cout << p << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error while running " << experiment << ": " << e.what()
              << "\n";
    return 2;
  }
  return 0;
}
