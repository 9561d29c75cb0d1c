#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plc/sim.hpp"

namespace plc {

struct ControllerSpec {
  ControllerKind kind = ControllerKind::bp;
  std::vector<double> error_curve;  // PLC only: e(0..w); empty means all zero

  double e_w() const;
  /// "bp", "plc:0.04" or "plc:0.01/0.02/0.03/0.04/0.05".
  std::string token() const;
  bool operator==(const ControllerSpec& other) const = default;
};

/// Two-queue segment: law with arrival probabilities (p1, p2) from `start`.
struct SegmentSpec {
  Slot start = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  bool operator==(const SegmentSpec& other) const = default;
};

/// Flat key = value experiment description. Keys:
///   scenario, model, horizon, segments (start:p1:p2;...),
///   controllers (bp;plc:<e_w>;plc:<e0>/<e1>/...), V (comma list), c, w,
///   eps_d, delta, theta_mode (simulation|theory), seeds (comma list or a-b),
///   zeta, dual_iters, warm_iters, warm_radius, out_dir.
struct ExperimentConfig {
  std::string scenario = "custom";
  std::string model = "two_queue";
  Slot horizon = 0;
  std::vector<SegmentSpec> segments;
  std::vector<ControllerSpec> controllers;
  std::vector<double> V_values;
  double c = 0.5;
  Slot w = 4;
  double eps_d = 0.1;
  double delta = 0.005;
  ThetaMode theta_mode = ThetaMode::simulation;
  std::vector<std::uint64_t> seeds;
  double zeta = 10.0;
  int dual_iters = 10000;
  int warm_iters = 100;
  double warm_radius = 0.05;
  std::string out_dir = "out";

  /// Throws ParameterError naming the first violated constraint.
  void validate() const;
  bool operator==(const ExperimentConfig& other) const = default;
};

ExperimentConfig scenario_stationary();
ExperimentConfig scenario_change();
/// "stationary" or "change".
ExperimentConfig scenario_by_name(const std::string& name);

std::string to_config_text(const ExperimentConfig& config);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

DistributionSchedule build_schedule(const ExperimentConfig& config);
/// Full PLC configuration for one V; errors propagate from derive_params.
PlcConfig build_plc_config(const ExperimentConfig& config, const ControllerSpec& controller, double V);
SimConfig build_sim_config(const ExperimentConfig& config, const SystemModel& model,
                           const ControllerSpec& controller, double V, std::uint64_t seed);

struct CellResult {
  ControllerSpec controller;
  double V = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Metrics metrics;
};

struct SweepOptions {
  int jobs = 1;
  bool write_files = true;
  bool write_traces = false;
};

struct SweepResult {
  std::vector<CellResult> cells;  // sorted by (controller, V, e_w, seed)
  int failures = 0;
};

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// Combined per-cell table.
std::string sweep_csv(const SweepResult& result);
/// Per (controller, e_w, V) means with min/max for utility and delay curves.
std::string plot_csv(const SweepResult& result);

struct OracleRow {
  double V = 0.0;
  Vector solver;
  Vector oracle;
  double linf = 0.0;
  bool capped = false;
  double seconds = 0.0;
};

/// Dual solver against the exhaustive lattice on [0, grid_max_factor * V]^r.
OracleRow run_oracle(double p1, double p2, double V, double grid_max_factor, double grid_step);

struct DetectBenchConfig {
  Distribution before;
  Distribution after;
  double eps_d = 0.1;
  double delta = 0.005;
  Slot w = 4;
  int trials = 2000;
  std::uint64_t seed = 0;
};

struct DetectBenchResult {
  Slot d = 0;
  Slot test_slot = 0;  // first slot at which the change test can run
  int trials = 0;
  int detections = 0;        // change runs: test fired at test_slot
  int false_positives = 0;   // stationary runs: test fired at test_slot
  double mean_tv_change = 0.0;
  double mean_tv_stationary = 0.0;

  double detection_rate() const { return trials ? static_cast<double>(detections) / trials : 0.0; }
  double false_positive_rate() const { return trials ? static_cast<double>(false_positives) / trials : 0.0; }
};

/// Monte Carlo of the two-window change test. Change runs draw `before` on
/// [0, d) and `after` from d on; stationary runs draw `before` throughout.
/// Predictions are exact. At the test slot 2d-w-1 the history window holds
/// exactly the d pre-change samples and the recent window is all post-change.
DetectBenchResult run_detect_bench(const DetectBenchConfig& config);

}  // namespace plc
