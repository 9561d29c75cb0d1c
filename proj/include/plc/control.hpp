#pragma once

#include <optional>

#include "plc/ade.hpp"
#include "plc/dual.hpp"
#include "plc/model.hpp"

namespace plc {

enum class ThetaMode {
  simulation,  // theta = log(V)^2
  theory,      // theta = 2 log(V)^2 (1 + V / sqrt(T_l))
};

struct PlcParams {
  double V = 100.0;
  double c = 0.5;
  Slot w = 4;
  double eps_d = 0.1;
  double delta = 0.005;  // detection error probability
  double e_w = 0.0;      // average prediction error
  Slot d = 1;
  /// max(V^c, e_w^-2), rounded up; kInfiniteLength when e_w = 0.
  Slot T_l = kInfiniteLength;
  /// Length the estimator actually waits for: T_l raised to at least d so
  /// the history window can hold the d samples the change test needs.
  Slot confidence_length = kInfiniteLength;
  double theta = 0.0;
  ThetaMode theta_mode = ThetaMode::simulation;

  void validate() const;
};

/// Parameter recipe. Theory mode uses delta = V^-log(V) and
/// d = ceil(4 log(V)^2 / eps_d^2 + w + 1); simulation mode uses the given
/// delta and d = ceil(2 ln(4/delta) / eps_d^2 + w + 1).
/// ceil(2 ln(4/delta) / eps_d^2 + w + 1)
Slot simulation_detection_window(double eps_d, double delta, Slot w);

PlcParams derive_params(double V, double c, Slot w, double eps_d, double e_w, ThetaMode mode,
                        double sim_delta = 0.005);

/// Q_j = q_j + (gamma_j - theta)^+
template <typename DerivedQ, typename DerivedG>
Vector augmented_queue(const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedG>& gamma,
                       double theta) {
  if (q.size() != gamma.size()) throw DimensionError("augmented_queue: q and gamma lengths differ");
  return q + (gamma.array() - theta).max(0.0).matrix();
}

/// argmax over the state's actions of -V f + sum_j Q_j (mu_j - A_j); ties go
/// to the lowest action index. With Q = q this is plain Backpressure.
Index choose_action(const SystemModel& model, Index state, const Vector& Q, double V);

struct PlcConfig {
  PlcParams params;
  DualSolverParams dual;
  /// A warm-started solve is used while pi_a stays within this total
  /// variation of the law behind the last cold solve.
  double warm_radius = 0.05;
  /// Replaces learning with a fixed multiplier (diagnostics and tests).
  std::optional<Vector> fixed_multiplier;
};

PlcConfig make_plc_config(const PlcParams& params);

struct ControllerState {
  Multiplier gamma;
  std::optional<Slot> pending_drop;
  std::optional<Distribution> last_pi_a;
  bool history_full_prev = false;  // W_m(t-1) = T_l

  std::optional<Distribution> solved_pi;
  std::optional<Distribution> anchor_pi;
};

struct SlotDecision {
  Index action = 0;
  Vector augmented;
  bool drop_executed = false;
  bool drop_scheduled = false;
  bool resolved = false;
};

/// One PLC slot: re-learns gamma* when pi_a moved, schedules the queue reset
/// at t+w+1 when a saturated history window ends, performs any reset due at
/// t (zeroing q in place), then picks the max-weight action on the
/// augmented queues.
SlotDecision plc_slot(ControllerState& state, const SystemModel& model, const PlcConfig& config,
                      Slot t, Index network_state, const Distribution& pi_a, bool history_full,
                      Vector& q);

}  // namespace plc
