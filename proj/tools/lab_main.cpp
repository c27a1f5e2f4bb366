#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lab/config.hpp"
#include "lab/errors.hpp"
#include "lab/runner.hpp"

namespace {

int run_and_report(const lab::ExperimentConfig& config) {
  const lab::RunResult result = lab::run_experiment(config);
  const lab::OutputPaths paths = lab::write_outputs(config, result);
  std::cout << "report:  " << paths.report << "\n";
  std::cout << "summary: " << paths.summary << "\n";
  std::cout << "invariants: " << (result.invariants_ok ? "ok" : "FAILED")
            << "\n";
  return result.invariants_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification laboratory for the loss landscape of residual "
               "networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  CLI::App* run_cmd =
      app.add_subcommand("run", "execute an experiment described by a config");
  run_cmd->add_option("config", config_path, "key = value experiment file")
      ->required();
  run_cmd->add_option("--output", output_override,
                      "override the output basename");

  std::vector<double> rho_values{0.5, 1.0};
  std::string prop1_output = "prop1";
  CLI::App* prop1_cmd = app.add_subcommand(
      "prop1", "split-fit lower bounds vs the explicit construction");
  prop1_cmd->add_option("--rho", rho_values,
                        "rho values, each in (0, sqrt(5)/2]");
  prop1_cmd->add_option("--output", prop1_output, "output basename");

  std::string nm_output = "nonmonotone";
  CLI::App* nm_cmd = app.add_subcommand(
      "nonmonotone", "three-point example with a non-monotone block profile");
  nm_cmd->add_option("--output", nm_output, "output basename");

  int depth = 2;
  std::vector<double> caps{1.0};
  int samples = 32;
  int d_x = 2;
  int trials = 30;
  int restarts = 8;
  int ascent_iters = 200;
  std::uint64_t seed = 1;
  bool exhaustive = false;
  std::string rad_output = "rademacher";
  CLI::App* rad_cmd =
      app.add_subcommand("rademacher", "complexity estimate vs bound");
  rad_cmd->add_option("--L", depth, "number of residual blocks");
  rad_cmd->add_option("--M", caps, "norm caps: one value, or one per block");
  rad_cmd->add_option("--n", samples, "sample count");
  rad_cmd->add_option("--dx", d_x, "input dimension");
  rad_cmd->add_option("--trials", trials, "independent sign draws");
  rad_cmd->add_option("--restarts", restarts, "ascent restarts per draw");
  rad_cmd->add_option("--iters", ascent_iters, "ascent iterations per restart");
  rad_cmd->add_option("--seed", seed, "master seed");
  rad_cmd->add_flag("--exhaustive", exhaustive,
                    "average over all 2^n sign patterns (n <= 20)");
  rad_cmd->add_option("--output", rad_output, "output basename");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      lab::ExperimentConfig config = lab::parse_config(config_path);
      if (!output_override.empty()) config.output = output_override;
      return run_and_report(config);
    }
    if (prop1_cmd->parsed()) {
      lab::ExperimentConfig config;
      config.kind = lab::ExperimentKind::kProp1;
      config.rho = rho_values;
      config.output = prop1_output;
      return run_and_report(config);
    }
    if (nm_cmd->parsed()) {
      lab::ExperimentConfig config;
      config.kind = lab::ExperimentKind::kNonMonotone;
      config.output = nm_output;
      return run_and_report(config);
    }
    if (rad_cmd->parsed()) {
      if (depth < 0) {
        std::cerr << "error: --L must be nonnegative\n";
        return 2;
      }
      std::vector<double> m = caps;
      if (static_cast<int>(m.size()) != depth) {
        if (m.size() == 1) {
          m.assign(static_cast<std::size_t>(depth), caps[0]);
        } else {
          std::cerr << "error: --M needs one value, or one per block\n";
          return 2;
        }
      }
      lab::ExperimentConfig config;
      config.kind = lab::ExperimentKind::kRademacherSweep;
      config.m = m;
      config.samples = samples;
      config.d_x = d_x;
      config.trials = trials;
      config.restarts = restarts;
      config.ascent_iters = ascent_iters;
      config.exhaustive = exhaustive;
      config.seeds = {seed};
      config.output = rad_output;
      return run_and_report(config);
    }
  } catch (const lab::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
