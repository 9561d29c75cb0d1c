#include "plc/control.hpp"

#include <cmath>
#include <limits>

namespace plc {

namespace {

constexpr double kPiChangeTolerance = 1e-12;

Slot ceil_slots(double x) {
  // Guard against values like 624.9999999999 that are integers in exact
  // arithmetic.
  return static_cast<Slot>(std::ceil(x - 1e-9));
}

}  // namespace

void PlcParams::validate() const {
  if (!(V >= 2.0) || !std::isfinite(V)) throw ParameterError("PlcParams: V >= 2 required");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("PlcParams: c in (0, 1) required");
  if (w < 0) throw ParameterError("PlcParams: w >= 0 required");
  if (!(eps_d > 0.0)) throw ParameterError("PlcParams: eps_d > 0 required");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("PlcParams: delta in (0, 1) required");
  if (!(e_w >= 0.0 && e_w <= 2.0)) throw ParameterError("PlcParams: e_w in [0, 2] required");
  if (d < w + 1) throw ParameterError("PlcParams: d >= w+1 required");
  if (confidence_length < d) throw ParameterError("PlcParams: T_l >= d required");
  if (!(theta >= 0.0)) throw ParameterError("PlcParams: theta >= 0 required");
}

Slot simulation_detection_window(double eps_d, double delta, Slot w) {
  if (!(eps_d > 0.0)) throw ParameterError("detection window: eps_d > 0 required");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("detection window: delta in (0, 1) required");
  if (w < 0) throw ParameterError("detection window: w >= 0 required");
  return ceil_slots(2.0 * std::log(4.0 / delta) / (eps_d * eps_d) + static_cast<double>(w + 1));
}

PlcParams derive_params(double V, double c, Slot w, double eps_d, double e_w, ThetaMode mode,
                        double sim_delta) {
  if (!(V >= 2.0) || !std::isfinite(V)) throw ParameterError("derive_params: V >= 2 required");
  if (!(eps_d > 0.0)) throw ParameterError("derive_params: eps_d > 0 required");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("derive_params: c in (0, 1) required");
  if (w < 0) throw ParameterError("derive_params: w >= 0 required");
  if (!(e_w >= 0.0 && e_w <= 2.0)) throw ParameterError("derive_params: e_w in [0, 2] required");

  PlcParams p;
  p.V = V;
  p.c = c;
  p.w = w;
  p.eps_d = eps_d;
  p.e_w = e_w;
  p.theta_mode = mode;

  const double log_v = std::log(V);
  const double window = static_cast<double>(w + 1);
  if (mode == ThetaMode::theory) {
    p.delta = std::pow(V, -log_v);
    p.d = ceil_slots(4.0 * log_v * log_v / (eps_d * eps_d) + window);
  } else {
    if (!(sim_delta > 0.0 && sim_delta < 1.0)) {
      throw ParameterError("derive_params: delta in (0, 1) required");
    }
    p.delta = sim_delta;
    p.d = simulation_detection_window(eps_d, sim_delta, w);
  }

  if (e_w > 0.0) {
    p.T_l = ceil_slots(std::max(std::pow(V, c), 1.0 / (e_w * e_w)));
    p.confidence_length = std::max(p.T_l, p.d);
  }

  if (mode == ThetaMode::theory) {
    const double ratio = p.T_l == kInfiniteLength ? 0.0 : V / std::sqrt(static_cast<double>(p.T_l));
    p.theta = 2.0 * log_v * log_v * (1.0 + ratio);
  } else {
    p.theta = log_v * log_v;
  }
  p.validate();
  return p;
}

Index choose_action(const SystemModel& model, Index state, const Vector& Q, double V) {
  if (Q.size() != model.num_queues()) throw DimensionError("choose_action: Q length must equal r");
  const Vector& cost = model.costs(state);
  const Matrix& drift = model.drift(state);
  Index best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Index a = 0; a < cost.size(); ++a) {
    double v = -V * cost[a];
    for (Index j = 0; j < Q.size(); ++j) v -= Q[j] * drift(a, j);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

PlcConfig make_plc_config(const PlcParams& params) {
  PlcConfig config;
  config.params = params;
  config.dual.V = params.V;
  return config;
}

SlotDecision plc_slot(ControllerState& state, const SystemModel& model, const PlcConfig& config,
                      Slot t, Index network_state, const Distribution& pi_a, bool history_full,
                      Vector& q) {
  const PlcParams& p = config.params;
  SlotDecision decision;

  // Learning.
  if (config.fixed_multiplier) {
    if (state.gamma.gamma.size() == 0) state.gamma = Multiplier{*config.fixed_multiplier, false, 0};
  } else if (!state.solved_pi || total_variation(pi_a, *state.solved_pi) > kPiChangeTolerance) {
    const bool warm = state.anchor_pi && state.gamma.gamma.size() == model.num_queues() &&
                      total_variation(pi_a, *state.anchor_pi) <= config.warm_radius;
    if (warm) {
      state.gamma = solve_multiplier(model, pi_a, config.dual, state.gamma.gamma);
    } else {
      state.gamma = solve_multiplier(model, pi_a, config.dual);
      state.anchor_pi = pi_a;
    }
    state.solved_pi = pi_a;
    decision.resolved = true;
  }

  if (state.history_full_prev && state.last_pi_a &&
      total_variation(pi_a, *state.last_pi_a) > kPiChangeTolerance) {
    state.pending_drop = t + p.w + 1;
    decision.drop_scheduled = true;
  }
  if (state.pending_drop && *state.pending_drop == t) {
    q.setZero();
    state.pending_drop.reset();
    decision.drop_executed = true;
  }

  // Control.
  decision.augmented = augmented_queue(q, state.gamma.gamma, p.theta);
  decision.action = choose_action(model, network_state, decision.augmented, p.V);

  state.last_pi_a = pi_a;
  state.history_full_prev = history_full;
  return decision;
}

}  // namespace plc
