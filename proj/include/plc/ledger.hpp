#pragma once

#include <deque>
#include <map>
#include <vector>

#include "plc/model.hpp"
#include "plc/schedule.hpp"

namespace plc {

enum class ServiceOrder { lifo, fifo };

/// Fluid per-queue record of which slot each unit of backlog arrived in.
/// Service splits batches fractionally; served mass is binned by delay
/// (service slot - arrival slot).
class QueueLedger {
 public:
  QueueLedger(Index num_queues, ServiceOrder order);

  void arrive(Index queue, Slot t, double mass);
  /// Serves up to `amount`; service beyond the backlog is wasted. Returns
  /// the mass actually served.
  double serve(Index queue, Slot t, double amount);
  /// Removes all stacked mass from the queue and returns it.
  double drop(Index queue);
  /// Clears residue left by rounding once the recurrence says the queue is
  /// empty. The residue is counted as served at delay 0.
  void settle_empty(Index queue);

  Index num_queues() const { return static_cast<Index>(stacks_.size()); }
  ServiceOrder order() const { return order_; }
  double backlog(Index queue) const;
  std::size_t batches(Index queue) const { return stacks_.at(static_cast<std::size_t>(queue)).size(); }

  double arrived(Index queue) const { return static_cast<double>(arrived_.at(static_cast<std::size_t>(queue))); }
  double served(Index queue) const { return static_cast<double>(served_.at(static_cast<std::size_t>(queue))); }
  double dropped(Index queue) const { return static_cast<double>(dropped_.at(static_cast<std::size_t>(queue))); }
  double total_arrived() const;
  double total_served() const;
  double total_dropped() const;

  /// Served mass keyed by delay in slots.
  const std::map<Slot, double>& delay_histogram() const { return histogram_; }

 private:
  struct Batch {
    Slot arrival;
    double mass;
  };

  std::vector<std::deque<Batch>> stacks_;
  std::vector<double> backlog_;
  // Running totals over up to ~10^6 slots; extended precision keeps the
  // conservation residual at the 1e-12 level.
  std::vector<long double> arrived_;
  std::vector<long double> served_;
  std::vector<long double> dropped_;
  std::map<Slot, double> histogram_;
  ServiceOrder order_;
};

struct DelayStats {
  double average = 0.0;  // mass-weighted
  double trimmed = 0.0;  // without the largest-delay `trim_fraction` of served mass
  double served_mass = 0.0;
  double dropped_mass = 0.0;
  std::map<Slot, double> histogram;
};

DelayStats measure_delay(const QueueLedger& ledger, double trim_fraction);

}  // namespace plc
