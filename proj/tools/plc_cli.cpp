// Command-line front end: single runs, sweeps, detector Monte Carlo and the
// dual-solver oracle check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plc/harness.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kCellFailure = 2;

struct Overrides {
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  long long horizon = 0;
  std::vector<double> V;
  std::string seeds;
  std::string controllers;
  std::string theta_mode;
  double zeta = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--scenario", scenario, "Preset: stationary or change");
    app->add_option("--config", config_path, "Flat key = value config file");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--horizon", horizon, "Slots to simulate");
    app->add_option("--V", V, "V values")->delimiter(',');
    app->add_option("--seeds", seeds, "Seeds, e.g. 0-9 or 1,4,7");
    app->add_option("--controllers", controllers, "e.g. bp;plc:0;plc:0.04");
    app->add_option("--theta-mode", theta_mode, "simulation or theory");
    app->add_option("--zeta", zeta, "Convergence ball radius");
  }

  plc::ExperimentConfig resolve() const {
    if (scenario.empty() && config_path.empty()) throw plc::ParameterError("--scenario or --config is required");
    plc::ExperimentConfig cfg =
        config_path.empty() ? plc::scenario_by_name(scenario) : plc::load_config(config_path);
    std::string text = plc::to_config_text(cfg);
    auto set = [&](const std::string& key, const std::string& value) { text += key + " = " + value + "\n"; };
    if (!out_dir.empty()) set("out_dir", out_dir);
    if (horizon) set("horizon", std::to_string(horizon));
    if (!V.empty()) {
      std::string list;
      for (double v : V) list += (list.empty() ? "" : ",") + plc::format_number(v);
      set("V", list);
    }
    if (!seeds.empty()) set("seeds", seeds);
    if (!controllers.empty()) set("controllers", controllers);
    if (!theta_mode.empty()) set("theta_mode", theta_mode);
    if (zeta > 0.0) set("zeta", plc::format_number(zeta));
    cfg = plc::parse_config_text(text);
    cfg.validate();
    return cfg;
  }
};

int cmd_run(const Overrides& ov, const std::string& controller, std::uint64_t seed, bool trace) {
  plc::ExperimentConfig cfg = ov.resolve();
  const plc::SystemModel model = plc::build_two_queue_preset();
  const plc::DistributionSchedule schedule = plc::build_schedule(cfg);
  plc::ControllerSpec spec = cfg.controllers.front();
  if (!controller.empty()) {
    cfg.controllers = plc::parse_config_text("controllers = " + controller).controllers;
    cfg.validate();
    spec = cfg.controllers.front();
  }
  const double V = cfg.V_values.front();
  plc::SimConfig sc = plc::build_sim_config(cfg, model, spec, V, seed);
  sc.record_trace = trace;
  plc::SimResult result;
  try {
    result = plc::run_simulation(model, schedule, sc);
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kCellFailure;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);
  std::ofstream(dir / "metrics.json") << plc::metrics_json(result.metrics) << '\n';
  if (trace) {
    std::ofstream out(dir / "trace.csv");
    plc::write_trace_csv(out, result.trace);
  }
  std::cout << plc::metrics_json(result.metrics) << '\n';
  return 0;
}

int cmd_sweep(const Overrides& ov, int jobs, bool traces) {
  const plc::ExperimentConfig cfg = ov.resolve();
  plc::SweepOptions options;
  options.jobs = jobs;
  options.write_traces = traces;
  const plc::SweepResult result = plc::run_sweep(cfg, options);
  std::cout << plc::plot_csv(result);
  std::cout << result.cells.size() << " cells, " << result.failures << " failed; output in " << cfg.out_dir << '\n';
  for (const auto& c : result.cells) {
    if (!c.ok) std::cerr << c.controller.token() << " V=" << c.V << " seed=" << c.seed << ": " << c.error << '\n';
  }
  return result.failures ? kCellFailure : 0;
}

int cmd_detect(int trials, std::uint64_t seed, double eps_d, double delta, long long w) {
  plc::DetectBenchConfig cfg{plc::two_queue_distribution(0.2, 0.4), plc::two_queue_distribution(0.3, 0.6),
                             eps_d, delta, w, trials, seed};
  const plc::DetectBenchResult r = plc::run_detect_bench(cfg);
  std::printf("d = %lld, test slot = %lld, trials = %d\n", static_cast<long long>(r.d),
              static_cast<long long>(r.test_slot), r.trials);
  std::printf("detection rate      %.4f  (mean window distance %.4f)\n", r.detection_rate(), r.mean_tv_change);
  std::printf("false positive rate %.4f  (mean window distance %.4f)\n", r.false_positive_rate(),
              r.mean_tv_stationary);
  return 0;
}

int cmd_oracle(const std::vector<double>& Vs, double p1, double p2, double factor, double step) {
  std::printf("%8s %26s %26s %10s %8s\n", "V", "solver", "oracle", "Linf", "seconds");
  for (double V : Vs) {
    const plc::OracleRow row = plc::run_oracle(p1, p2, V, factor, step);
    char solver[64], oracle[64];
    std::snprintf(solver, sizeof solver, "(%.4f, %.4f)%s", row.solver[0], row.solver[1], row.capped ? "*" : "");
    std::snprintf(oracle, sizeof oracle, "(%.4f, %.4f)", row.oracle[0], row.oracle[1]);
    std::printf("%8g %26s %26s %10.4f %8.2f\n", V, solver, oracle, row.linf, row.seconds);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive learning-aided control simulator"};
  app.require_subcommand(1);

  Overrides run_ov, sweep_ov, show_ov;
  std::string controller;
  std::uint64_t seed = 0;
  bool trace = true;
  auto* run = app.add_subcommand("run", "Simulate one cell and write trace.csv and metrics.json");
  run_ov.attach(run);
  run->add_option("--controller", controller, "Controller token (default: first in config)");
  run->add_option("--seed", seed, "Seed")->required();
  run->add_flag("--trace,!--no-trace", trace, "Write the per-slot trace");

  int jobs = 1;
  bool traces = false;
  auto* sweep = app.add_subcommand("sweep", "Run every (controller, V, seed) cell");
  sweep_ov.attach(sweep);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--traces", traces, "Also write per-cell traces");

  int trials = 2000;
  std::uint64_t bench_seed = 0;
  double eps_d = 0.1, delta = 0.005;
  long long w = 4;
  auto* detect = app.add_subcommand("detect-bench", "Monte Carlo of the change test on the two-queue laws");
  detect->add_option("--trials", trials, "Trials per case")->check(CLI::PositiveNumber);
  detect->add_option("--seed", bench_seed, "Seed");
  detect->add_option("--eps-d", eps_d, "Detection threshold");
  detect->add_option("--delta", delta, "Detection error probability");
  detect->add_option("--w", w, "Prediction horizon");

  std::vector<double> oracle_V{20, 100};
  double p1 = 0.3, p2 = 0.6, factor = 2.0, step = 0.25;
  auto* oracle = app.add_subcommand("oracle", "Compare the dual solver with the lattice oracle");
  oracle->add_option("--V", oracle_V, "V values")->delimiter(',');
  oracle->add_option("--p1", p1, "Arrival probability of queue 1");
  oracle->add_option("--p2", p2, "Arrival probability of queue 2");
  oracle->add_option("--grid-factor", factor, "Lattice spans [0, factor * V]");
  oracle->add_option("--grid-step", step, "Lattice spacing");

  auto* show = app.add_subcommand("show-config", "Print a scenario as a config file");
  show_ov.attach(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  try {
    if (*run) return cmd_run(run_ov, controller, seed, trace);
    if (*sweep) return cmd_sweep(sweep_ov, jobs, traces);
    if (*detect) return cmd_detect(trials, bench_seed, eps_d, delta, w);
    if (*oracle) return cmd_oracle(oracle_V, p1, p2, factor, step);
    if (*show) {
      std::cout << plc::to_config_text(show_ov.resolve());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return 0;
}
