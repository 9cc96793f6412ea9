// Command-line front end: runs one named experiment and writes its CSV
// (and optional SVG plot) into the output directory.
//
//   pwmperc <experiment> [--config FILE] [--set key=value]...
//           [--model linear|squarelaw] [--out DIR] [--plot]
//
// Exit codes: 0 success, 2 configuration error, 3 solver error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwmperc/config.hpp"
#include "pwmperc/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PWM perceptron cell simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string model;
  std::string out_dir = "out";
  bool plot = false;

  const std::vector<std::string> experiments = {
      "duty_sweep", "freq_sweep", "vdd_sweep_abs", "vdd_sweep_rel",
      "adder_table", "power_sweep", "single_run"};
  for (const auto& name : experiments) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--set", overrides, "override, e.g. --set supply.v_dd=1.8");
    sub->add_option("--model", model, "device model")
        ->check(CLI::IsMember({"linear", "squarelaw"}));
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--plot", plot, "emit an SVG plot next to the CSV");
  }

  CLI11_PARSE(app, argc, argv);

  pwmperc::ExperimentSpec spec;
  spec.name = app.get_subcommands().front()->get_name();
  spec.out_dir = out_dir;
  spec.plot = plot;

  try {
    spec.params = config_path.empty() ? pwmperc::Params{} : pwmperc::load_config(config_path);
    for (const auto& kv : overrides) pwmperc::apply_override(spec.params, kv);
    if (!model.empty()) pwmperc::apply_override(spec.params, "model.kind=" + model);
  } catch (const pwmperc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    pwmperc::run_experiment(spec);
  } catch (const pwmperc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const pwmperc::SolverError& e) {
    std::fprintf(stderr, "solver error: %s (t=%g s, v=%g V)\n", e.what(), e.time_s, e.v_node);
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  }
  return 0;
}
