#include <CLI11.hpp>
#include <iostream>

#include "plgrad/cli.hpp"

namespace {

void add_experiment_flags(CLI::App& cmd, plgrad::CliOptions& opts, std::string& config, std::string& preset,
                          std::string& out) {
  cmd.add_option("--config", config, "Experiment config file");
  cmd.add_option("--preset", preset, "Named preset (overlaid by --config)");
  cmd.add_option("--out", out, "Output directory")->capture_default_str();
  cmd.add_option_function<int>("--trials", [&opts](int v) { opts.trials = v; }, "Number of Monte Carlo trials");
  cmd.add_option_function<std::uint64_t>("--seed", [&opts](std::uint64_t v) { opts.seed = v; }, "Base seed");
  cmd.add_option_function<std::vector<double>>(
         "--delta", [&opts](const std::vector<double>& v) { opts.deltas = v; }, "Confidence levels, e.g. 0.1,0.05")
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online (proximal) gradient methods under sub-Weibull gradient errors"};
  app.require_subcommand(1);

  plgrad::CliOptions run_opts, validate_opts;
  std::string run_config, run_preset, run_out = "out";
  std::string val_config, val_preset, val_out = "out";

  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write regret.csv, bounds.csv, summary.txt");
  add_experiment_flags(*run, run_opts, run_config, run_preset, run_out);
  auto* validate = app.add_subcommand("validate", "Run the invariant battery and print a pass/fail table");
  add_experiment_flags(*validate, validate_opts, val_config, val_preset, val_out);

  plgrad::BoundsParams bp;
  double mu = 0.0, smoothness = 0.0, diameter = 0.0;
  auto* bounds = app.add_subcommand("bounds", "Print regret certificates without simulating");
  bounds->add_option("--theta", bp.theta, "Tail parameter")->capture_default_str();
  bounds->add_option("--k", bp.k, "Sub-Weibull constant of ||e||")->capture_default_str();
  bounds->add_option("--delta", bp.deltas, "Confidence levels")->delimiter(',')->capture_default_str();
  auto* mu_opt = bounds->add_option("--mu", mu, "PL constant");
  auto* l_opt = bounds->add_option("--L", smoothness, "Smoothness constant");
  auto* d_opt = bounds->add_option("--diameter", diameter, "Domain diameter D");
  bounds->add_option("--r0", bp.r0, "Initial regret")->capture_default_str();
  bounds->add_option("--e-bar", bp.e_bar, "E||e||^2, constant in t")->capture_default_str();
  bounds->add_option("--psi-bar", bp.psi_bar, "Variability psi, constant in t")->capture_default_str();
  bounds->add_option("--horizon", bp.horizon, "Also print bound series up to this horizon")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto finish = [](plgrad::CliOptions& o, const std::string& config, const std::string& preset,
                         const std::string& out) {
    if (!config.empty()) o.config = config;
    if (!preset.empty()) o.preset = preset;
    o.out = out;
  };
  if (*run) {
    finish(run_opts, run_config, run_preset, run_out);
    return plgrad::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (*validate) {
    finish(validate_opts, val_config, val_preset, val_out);
    return plgrad::cmd_validate(validate_opts, std::cout, std::cerr);
  }
  if (*mu_opt) bp.mu = mu;
  if (*l_opt) bp.smoothness = smoothness;
  if (*d_opt) bp.diameter = diameter;
  return plgrad::cmd_bounds(bp, std::cout, std::cerr);
}
