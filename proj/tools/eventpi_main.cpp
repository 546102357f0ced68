#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eventpi/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"eventpi: event-count prediction intervals for interim "
               "monitoring of event-driven trials"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_set = false, threads_set = false, output_set = false;

  const auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--config", config_path, "JSON configuration file")
        ->required();
    if (needs_data) {
      cmd->add_option("data", data_path, "trial CSV file")->required();
    }
    cmd->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads, "worker thread count (0 = all cores)")
        ->each([&](const std::string&) { threads_set = true; });
    cmd->add_option("--output", output_dir, "output directory")
        ->each([&](const std::string&) { output_set = true; });
  };

  auto* fit = app.add_subcommand("fit", "fit candidate survival models and "
                                        "rank them by information criteria");
  auto* predict = app.add_subcommand(
      "predict", "bootstrap prediction intervals for future event counts");
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo coverage study over a scenario grid");
  auto* calibrate = app.add_subcommand(
      "calibrate", "bisection calibration of the generating event scale");
  auto* diagnose = app.add_subcommand(
      "diagnose", "transformed Kaplan-Meier survival versus log time");

  add_common(fit, true);
  add_common(predict, true);
  add_common(simulate, false);
  add_common(calibrate, false);
  add_common(diagnose, true);

  CLI11_PARSE(app, argc, argv);

  try {
    eventpi::RunConfig cfg = eventpi::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (threads_set) cfg.threads = threads;
    if (output_set) cfg.output_dir = output_dir;

    if (fit->parsed()) {
      eventpi::cmd_fit(data_path, cfg);
    } else if (predict->parsed()) {
      eventpi::cmd_predict(data_path, cfg);
    } else if (simulate->parsed()) {
      eventpi::cmd_simulate(cfg);
    } else if (calibrate->parsed()) {
      eventpi::cmd_calibrate(cfg);
    } else if (diagnose->parsed()) {
      eventpi::cmd_diagnose(data_path, cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(eventpi::exit_code_for(e));
  }
  return 0;
}
