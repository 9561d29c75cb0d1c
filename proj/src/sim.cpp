#include "plc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace plc {

const char* to_string(ControllerKind kind) { return kind == ControllerKind::plc ? "plc" : "bp"; }

const char* to_string(ServiceOrder order) { return order == ServiceOrder::lifo ? "lifo" : "fifo"; }

ServiceOrder SimConfig::service_order() const {
  if (order) return *order;
  return controller == ControllerKind::plc ? ServiceOrder::lifo : ServiceOrder::fifo;
}

void SimConfig::validate(const SystemModel& model, const DistributionSchedule& schedule) const {
  if (horizon < 1) throw ParameterError("SimConfig: T >= 1 required");
  if (schedule.horizon() < horizon) throw ParameterError("SimConfig: schedule horizon >= T required");
  if (schedule.num_states() != model.num_states()) {
    throw DimensionError("SimConfig: schedule and model disagree on M");
  }
  if (!(V > 0.0) || !std::isfinite(V)) throw ParameterError("SimConfig: V > 0 required");
  if (!(zeta > 0.0)) throw ParameterError("SimConfig: zeta > 0 required");
  if (reference_gamma && reference_gamma->size() != model.num_queues()) {
    throw DimensionError("SimConfig: reference gamma length must equal r");
  }
  if (controller == ControllerKind::plc) {
    if (!plc) throw ParameterError("SimConfig: PLC controller needs PLC parameters");
    plc->params.validate();
    plc->dual.validate();
    if (plc->params.V != V) throw ParameterError("SimConfig: PLC V must equal the run's V");
    profile.validate();
    if (profile.horizon() != plc->params.w) {
      throw ParameterError("SimConfig: prediction window must hold w+1 entries");
    }
    if (plc->fixed_multiplier && plc->fixed_multiplier->size() != model.num_queues()) {
      throw DimensionError("SimConfig: fixed multiplier length must equal r");
    }
  }
}

namespace {

Rng stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return Rng(seq);
}

Index draw_state(const Distribution& pi, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  Index last = 0;
  for (Index i = 0; i < pi.size(); ++i) {
    if (pi[i] <= 0.0) continue;
    acc += pi[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

DetectionSummary attribute_events(const std::vector<Slot>& events, const DistributionSchedule& schedule,
                                  Slot w) {
  DetectionSummary summary;
  const std::vector<Slot> changes = schedule.change_points();
  std::vector<bool> used(events.size(), false);
  for (std::size_t k = 0; k < changes.size(); ++k) {
    const Slot lo = changes[k] - w;
    const Slot hi = k + 1 < changes.size() ? changes[k + 1] - w : std::numeric_limits<Slot>::max();
    DetectionStat stat;
    stat.change_slot = changes[k];
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i] >= lo && events[i] < hi) {
        stat.detected_slot = events[i];
        stat.delay = events[i] - changes[k];
        used[i] = true;
        break;
      }
    }
    summary.changes.push_back(stat);
  }
  for (bool u : used) {
    if (!u) ++summary.false_positives;
  }
  return summary;
}

}  // namespace

SimResult run_simulation(const SystemModel& model, const DistributionSchedule& schedule,
                         const SimConfig& config) {
  config.validate(model, schedule);
  const Index r = model.num_queues();
  const bool is_plc = config.controller == ControllerKind::plc;

  Rng state_rng = stream(config.seed, 1);
  Rng prediction_rng = stream(config.seed, 2);

  std::optional<AdeEstimator> ade;
  ControllerState controller;
  if (is_plc) {
    const PlcParams& p = config.plc->params;
    ade.emplace(AdeParams{p.confidence_length, p.d, p.eps_d, model.num_states(), config.profile.error_curve});
  }

  QueueLedger ledger(r, config.service_order());
  Vector q = Vector::Zero(r);
  const Vector zero = Vector::Zero(r);

  SimResult result;
  Metrics& m = result.metrics;
  m.horizon = config.horizon;
  if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.horizon));

  double cost_sum = 0.0;
  double backlog_sum = 0.0;
  std::vector<Slot> event_slots;

  for (Slot t = 0; t < config.horizon; ++t) {
    const Index s = draw_state(schedule.at(t), state_rng);
    std::uint32_t events = kEventNone;
    Index action = 0;
    Vector augmented;
    bool history = false;

    if (is_plc) {
      const PredictionWindow window = synthesize_prediction(schedule, t, config.profile, prediction_rng);
      const AdeEvents ev = ade->update(t, s, window);
      if (ev.change_detected) {
        events |= kEventDetection;
        ++m.detections;
      }
      if (ev.reset_point) {
        events |= kEventResetPoint;
        ++m.reset_points;
      }
      if (ev.restarted()) {
        event_slots.push_back(t);
        result.restart_slots.push_back(t);
      }
      history = ade->using_history();
      const Distribution pi_a = ade->estimate(window);
      const SlotDecision decision = plc_slot(controller, model, *config.plc, t, s, pi_a, history, q);
      if (decision.resolved) {
        events |= kEventResolve;
        ++m.solves;
      }
      if (decision.drop_scheduled) events |= kEventDropScheduled;
      if (decision.drop_executed) {
        events |= kEventDrop;
        ++m.drop_events;
        result.drop_slots.push_back(t);
        for (Index j = 0; j < r; ++j) ledger.drop(j);
      }
      if (controller.gamma.capped) {
        events |= kEventCapped;
        ++m.capped_slots;
      }
      action = decision.action;
      augmented = decision.augmented;
    } else {
      action = choose_action(model, s, q, config.V);
      augmented = q;
    }

    const ActionOutcome outcome = model.evaluate(s, action);
    const Vector next = queue_update(q, outcome);
    for (Index j = 0; j < r; ++j) {
      ledger.arrive(j, t, outcome.arrivals[j]);
      ledger.serve(j, t, outcome.services[j]);
      if (next[j] == 0.0) ledger.settle_empty(j);
      const double conservation =
          std::abs(ledger.arrived(j) - ledger.served(j) - ledger.dropped(j) - ledger.backlog(j));
      result.max_conservation_error = std::max(result.max_conservation_error, conservation);
      result.max_recurrence_error = std::max(result.max_recurrence_error, std::abs(ledger.backlog(j) - next[j]));
    }

    cost_sum += outcome.cost;
    backlog_sum += q.sum();

    const Vector& gamma = is_plc ? controller.gamma.gamma : zero;
    if (config.reference_gamma && !m.convergence_time && t >= config.convergence_from &&
        (augmented - *config.reference_gamma).norm() <= config.zeta) {
      m.convergence_time = t - config.convergence_from;
    }

    if (config.record_trace) {
      TraceRecord rec;
      rec.slot = t;
      rec.state = s;
      rec.action = action;
      rec.cost = outcome.cost;
      rec.arrivals = outcome.arrivals;
      rec.services = outcome.services;
      rec.queue = q;
      rec.backlog = next;
      rec.gamma = gamma;
      rec.augmented = std::move(augmented);
      rec.history_branch = history;
      rec.events = events;
      result.trace.push_back(std::move(rec));
    }
    q = next;
  }

  const double horizon = static_cast<double>(config.horizon);
  m.avg_cost = cost_sum / horizon;
  m.avg_backlog = backlog_sum / horizon;
  result.delay = measure_delay(ledger, std::min(1.0 / config.V, 0.5));
  m.avg_delay = result.delay.average;
  m.trimmed_delay = result.delay.trimmed;
  m.arrived_mass = ledger.total_arrived();
  m.served_mass = ledger.total_served();
  m.dropped_mass = ledger.total_dropped();
  m.drop_rate = m.arrived_mass > 0.0 ? m.dropped_mass / m.arrived_mass : 0.0;
  m.detection = attribute_events(event_slots, schedule, is_plc ? config.plc->params.w : 0);
  return result;
}

std::optional<Slot> convergence_time(const std::vector<TraceRecord>& trace, const Vector& gamma_star,
                                     double zeta, Slot from) {
  for (const auto& rec : trace) {
    if (rec.slot < from) continue;
    if (rec.augmented.size() != gamma_star.size()) {
      throw DimensionError("convergence_time: gamma* length must equal r");
    }
    if ((rec.augmented - gamma_star).norm() <= zeta) return rec.slot - from;
  }
  return std::nullopt;
}

DetectionSummary detection_stats(const std::vector<TraceRecord>& trace,
                                 const DistributionSchedule& schedule, Slot w) {
  std::vector<Slot> events;
  for (const auto& rec : trace) {
    if (rec.has(kEventDetection) || rec.has(kEventResetPoint)) events.push_back(rec.slot);
  }
  return attribute_events(events, schedule, w);
}

TraceAverages trace_averages(const std::vector<TraceRecord>& trace) {
  TraceAverages avg;
  if (trace.empty()) return avg;
  for (const auto& rec : trace) {
    avg.avg_cost += rec.cost;
    avg.avg_backlog += rec.queue.sum();
  }
  avg.avg_cost /= static_cast<double>(trace.size());
  avg.avg_backlog /= static_cast<double>(trace.size());
  return avg;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

std::string event_names(std::uint32_t events) {
  static const std::pair<TraceEvent, const char*> kNames[] = {
      {kEventDetection, "detection"}, {kEventResetPoint, "reset"},  {kEventDropScheduled, "drop_scheduled"},
      {kEventDrop, "drop"},           {kEventCapped, "cap"},        {kEventResolve, "resolve"},
  };
  std::string out;
  for (const auto& [flag, name] : kNames) {
    if (events & flag) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  const Index r = trace.empty() ? 0 : trace.front().queue.size();
  out << "slot,state,action,cost";
  for (const char* col : {"arrival", "service", "queue", "backlog", "gamma", "augmented"}) {
    for (Index j = 1; j <= r; ++j) out << ',' << col << '_' << j;
  }
  out << ",branch,events\n";
  for (const auto& rec : trace) {
    out << rec.slot << ',' << rec.state << ',' << rec.action << ',' << format_number(rec.cost);
    for (const Vector* v : {&rec.arrivals, &rec.services, &rec.queue, &rec.backlog, &rec.gamma, &rec.augmented}) {
      for (Index j = 0; j < r; ++j) out << ',' << format_number((*v)[j]);
    }
    out << ',' << (rec.history_branch ? "history" : "prediction") << ',' << event_names(rec.events) << '\n';
  }
}

std::string metrics_json(const Metrics& m, int indent) {
  nlohmann::ordered_json j;
  j["horizon"] = m.horizon;
  j["avg_cost"] = m.avg_cost;
  j["avg_backlog"] = m.avg_backlog;
  j["avg_delay"] = m.avg_delay;
  j["trimmed_delay"] = m.trimmed_delay;
  j["drop_rate"] = m.drop_rate;
  j["arrived_mass"] = m.arrived_mass;
  j["served_mass"] = m.served_mass;
  j["dropped_mass"] = m.dropped_mass;
  j["drop_events"] = m.drop_events;
  j["detections"] = m.detections;
  j["reset_points"] = m.reset_points;
  j["solves"] = m.solves;
  j["capped_slots"] = m.capped_slots;
  j["T_zeta"] = m.convergence_time ? nlohmann::ordered_json(*m.convergence_time) : nlohmann::ordered_json();
  nlohmann::ordered_json changes = nlohmann::ordered_json::array();
  for (const auto& c : m.detection.changes) {
    changes.push_back({{"change_slot", c.change_slot},
                       {"detected_slot", c.detected_slot ? nlohmann::ordered_json(*c.detected_slot)
                                                         : nlohmann::ordered_json()},
                       {"delay", c.delay ? nlohmann::ordered_json(*c.delay) : nlohmann::ordered_json()}});
  }
  j["detection_delays"] = changes;
  j["false_positives"] = m.detection.false_positives;
  return j.dump(indent);
}

}  // namespace plc
