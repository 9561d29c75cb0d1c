#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plc/control.hpp"
#include "plc/ledger.hpp"
#include "plc/prediction.hpp"
#include "plc/schedule.hpp"

namespace plc {

enum class ControllerKind { bp, plc };

const char* to_string(ControllerKind kind);
const char* to_string(ServiceOrder order);

/// Bit flags carried by a trace record.
enum TraceEvent : std::uint32_t {
  kEventNone = 0,
  kEventDetection = 1u << 0,    // change test fired; windows restart at t+w+1
  kEventResetPoint = 1u << 1,   // prediction test fired; windows restart at t+w+1
  kEventDropScheduled = 1u << 2,
  kEventDrop = 1u << 3,         // backlog annihilated at this slot
  kEventCapped = 1u << 4,       // the multiplier in use is the V log(V) cap
  kEventResolve = 1u << 5,      // gamma* was re-learned at this slot
};

struct TraceRecord {
  Slot slot = 0;
  Index state = 0;
  Index action = 0;
  double cost = 0.0;
  Vector arrivals;
  Vector services;
  Vector queue;      // q(t), after any drop at t
  Vector backlog;    // q(t+1)
  Vector gamma;      // multiplier in use (zero for BP)
  Vector augmented;  // Q(t)
  bool history_branch = false;  // pi_a came from the history window
  std::uint32_t events = kEventNone;

  bool has(TraceEvent e) const { return (events & e) != 0; }
};

struct SimConfig {
  ControllerKind controller = ControllerKind::bp;
  double V = 100.0;
  /// Required for PLC; V must match.
  std::optional<PlcConfig> plc;
  PredictionProfile profile;
  /// Defaults to LIFO for PLC and FIFO for BP.
  std::optional<ServiceOrder> order;
  std::uint64_t seed = 0;
  Slot horizon = 0;
  bool record_trace = true;
  /// Convergence is measured from this slot toward `reference_gamma`.
  std::optional<Vector> reference_gamma;
  Slot convergence_from = 0;
  double zeta = 10.0;

  ServiceOrder service_order() const;
  void validate(const SystemModel& model, const DistributionSchedule& schedule) const;
};

struct DetectionStat {
  Slot change_slot = 0;
  std::optional<Slot> detected_slot;
  std::optional<Slot> delay;  // detected_slot - change_slot, may be negative
};

struct DetectionSummary {
  std::vector<DetectionStat> changes;
  long false_positives = 0;
};

struct Metrics {
  Slot horizon = 0;
  double avg_cost = 0.0;
  double avg_backlog = 0.0;
  double avg_delay = 0.0;
  double trimmed_delay = 0.0;
  double drop_rate = 0.0;
  double arrived_mass = 0.0;
  double served_mass = 0.0;
  double dropped_mass = 0.0;
  long drop_events = 0;
  long detections = 0;
  long reset_points = 0;
  long solves = 0;
  long capped_slots = 0;
  std::optional<Slot> convergence_time;
  DetectionSummary detection;
};

struct SimResult {
  std::vector<TraceRecord> trace;
  Metrics metrics;
  DelayStats delay;
  std::vector<Slot> drop_slots;
  std::vector<Slot> restart_slots;
  double max_conservation_error = 0.0;  // |arrived - served - dropped - backlog|
  double max_recurrence_error = 0.0;    // |ledger backlog - q|
};

SimResult run_simulation(const SystemModel& model, const DistributionSchedule& schedule,
                         const SimConfig& config);

/// Slots from `from` until ||Q(t) - gamma*||_2 <= zeta first holds; empty if
/// it never does.
std::optional<Slot> convergence_time(const std::vector<TraceRecord>& trace, const Vector& gamma_star,
                                     double zeta, Slot from = 0);

/// Attributes the first restart event at or after t_k - w (and before the
/// next change's window) to change t_k. Every other restart is a false
/// positive.
DetectionSummary detection_stats(const std::vector<TraceRecord>& trace,
                                 const DistributionSchedule& schedule, Slot w);

/// Time averages recomputed from trace records alone.
struct TraceAverages {
  double avg_cost = 0.0;
  double avg_backlog = 0.0;
};
TraceAverages trace_averages(const std::vector<TraceRecord>& trace);

/// Columns: slot,state,action,cost, then arrival_j, service_j, queue_j,
/// backlog_j, gamma_j, augmented_j for j = 1..r, then branch,events.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
std::string metrics_json(const Metrics& metrics, int indent = 2);

/// "%.9g" formatting used for all exported numbers.
std::string format_number(double x);

}  // namespace plc
