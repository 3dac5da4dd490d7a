#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "driftsim/output.hpp"
#include "driftsim/scenario.hpp"
#include "driftsim/simulation.hpp"

namespace {

void print_summary(const driftsim::RunMetrics& m) {
  std::printf("steps              : %d\n", m.steps);
  std::printf("max |e_d|          : %.3f m\n", m.max_abs_lateral_error);
  std::printf("rms e_d            : %.3f m\n", m.rms_lateral_error);
  if (m.steady_lateral_error) {
    std::printf("steady e_d         : %.3f m\n", *m.steady_lateral_error);
  }
  if (m.drift_onset_time) {
    std::printf("drift onset        : %.2f s\n", *m.drift_onset_time);
  } else {
    std::printf("drift onset        : none\n");
  }
  if (m.steady_sideslip_deg) {
    std::printf("steady sideslip    : %.1f deg\n", *m.steady_sideslip_deg);
  }
  if (m.steady_yaw_rate) {
    std::printf("steady yaw rate    : %.3f rad/s\n", *m.steady_yaw_rate);
  }
  std::printf("max utilization    : front %.2f, rear %.2f\n", m.max_front_utilization,
              m.max_rear_utilization);
  if (m.aborted) {
    std::printf("ABORTED            : %s\n", m.abort_reason.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftsim - closed-loop drift control scenario runner"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir = "out";
  bool no_compensation = false;
  bool corrected_a = false;
  unsigned seed = 0;
  bool seed_given = false;
  std::string qp_dump_dir;

  auto* run_cmd = app.add_subcommand("run", "run a scenario and write its artifacts");
  run_cmd->add_option("scenario", scenario_file, "scenario YAML file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (default: out)");
  run_cmd->add_flag("--no-compensation", no_compensation,
                    "disable the input-disturbance compensation");
  run_cmd->add_flag("--corrected-A", corrected_a,
                    "enable the yaw-rate-error coupling in the tracking model");
  run_cmd
      ->add_option("--seed", seed, "override the scenario random seed")
      ->each([&](const std::string&) { seed_given = true; });
  run_cmd->add_option("--dump-qp", qp_dump_dir,
                      "dump every control-step QP into this directory");

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "parse and check a scenario file");
  validate_cmd->add_option("scenario", validate_file, "scenario YAML file")->required();

  std::string run_dir;
  auto* metrics_cmd =
      app.add_subcommand("metrics", "recompute metrics from an emitted run directory");
  metrics_cmd->add_option("run_dir", run_dir, "directory containing timeseries.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      driftsim::Scenario scenario = driftsim::load_scenario(scenario_file);
      if (no_compensation) scenario.controller.compensation_enabled = false;
      if (corrected_a) scenario.controller.couple_yaw_rate_error = true;
      if (seed_given) scenario.seed = seed;

      driftsim::RunOptions options;
      if (!qp_dump_dir.empty()) {
        std::filesystem::create_directories(qp_dump_dir);
        options.qp_dump_dir = qp_dump_dir;
      }
      const driftsim::RunResult result = driftsim::run(scenario, options);
      driftsim::emit(result, scenario, out_dir);
      std::printf("scenario '%s' -> %s\n", scenario.name.c_str(), out_dir.c_str());
      print_summary(result.metrics);
      return result.metrics.aborted ? 2 : 0;
    }
    if (*validate_cmd) {
      const driftsim::Scenario scenario = driftsim::load_scenario(validate_file);
      std::printf("OK: scenario '%s' is valid\n", scenario.name.c_str());
      return 0;
    }
    if (*metrics_cmd) {
      const driftsim::RunMetrics m = driftsim::metrics_from_csv(run_dir + "/timeseries.csv");
      const std::string name =
          driftsim::scenario_name_from_metrics(run_dir + "/metrics.json");
      std::fputs(driftsim::metrics_json(m, name).c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
