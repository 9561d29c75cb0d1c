#include "plc/ledger.hpp"

#include <algorithm>
#include <numeric>

namespace plc {

QueueLedger::QueueLedger(Index num_queues, ServiceOrder order) : order_(order) {
  if (num_queues < 1) throw ParameterError("QueueLedger: at least one queue required");
  const auto r = static_cast<std::size_t>(num_queues);
  stacks_.resize(r);
  backlog_.assign(r, 0.0);
  arrived_.assign(r, 0.0L);
  served_.assign(r, 0.0L);
  dropped_.assign(r, 0.0L);
}

double QueueLedger::backlog(Index queue) const { return backlog_.at(static_cast<std::size_t>(queue)); }

void QueueLedger::arrive(Index queue, Slot t, double mass) {
  if (mass < 0.0) throw DomainError("QueueLedger::arrive: negative mass");
  const auto j = static_cast<std::size_t>(queue);
  if (mass == 0.0) return;
  auto& stack = stacks_.at(j);
  if (!stack.empty() && stack.back().arrival == t) {
    stack.back().mass += mass;
  } else {
    stack.push_back(Batch{t, mass});
  }
  backlog_[j] += mass;
  arrived_[j] += mass;
}

double QueueLedger::serve(Index queue, Slot t, double amount) {
  if (amount < 0.0) throw DomainError("QueueLedger::serve: negative amount");
  const auto j = static_cast<std::size_t>(queue);
  auto& stack = stacks_.at(j);
  double left = amount;
  double done = 0.0;
  while (left > 0.0 && !stack.empty()) {
    Batch& b = order_ == ServiceOrder::lifo ? stack.back() : stack.front();
    const double take = std::min(left, b.mass);
    histogram_[t - b.arrival] += take;
    done += take;
    left -= take;
    if (take >= b.mass) {
      if (order_ == ServiceOrder::lifo) {
        stack.pop_back();
      } else {
        stack.pop_front();
      }
    } else {
      b.mass -= take;
    }
  }
  backlog_[j] = stack.empty() ? 0.0 : std::max(0.0, backlog_[j] - done);
  served_[j] += done;
  return done;
}

double QueueLedger::drop(Index queue) {
  const auto j = static_cast<std::size_t>(queue);
  auto& stack = stacks_.at(j);
  double mass = 0.0;
  for (const auto& b : stack) mass += b.mass;
  stack.clear();
  backlog_[j] = 0.0;
  dropped_[j] += mass;
  return mass;
}

void QueueLedger::settle_empty(Index queue) {
  const auto j = static_cast<std::size_t>(queue);
  auto& stack = stacks_.at(j);
  double mass = 0.0;
  for (const auto& b : stack) mass += b.mass;
  if (mass > 0.0) {
    histogram_[0] += mass;
    served_[j] += mass;
  }
  stack.clear();
  backlog_[j] = 0.0;
}

double QueueLedger::total_arrived() const {
  return static_cast<double>(std::accumulate(arrived_.begin(), arrived_.end(), 0.0L));
}
double QueueLedger::total_served() const {
  return static_cast<double>(std::accumulate(served_.begin(), served_.end(), 0.0L));
}
double QueueLedger::total_dropped() const {
  return static_cast<double>(std::accumulate(dropped_.begin(), dropped_.end(), 0.0L));
}

DelayStats measure_delay(const QueueLedger& ledger, double trim_fraction) {
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
    throw ParameterError("measure_delay: trim fraction in [0, 1) required");
  }
  DelayStats stats;
  stats.histogram = ledger.delay_histogram();
  stats.dropped_mass = ledger.total_dropped();

  double weighted = 0.0;
  for (const auto& [delay, mass] : stats.histogram) {
    stats.served_mass += mass;
    weighted += static_cast<double>(delay) * mass;
  }
  if (stats.served_mass <= 0.0) return stats;
  stats.average = weighted / stats.served_mass;

  // Keep the smallest-delay (1 - trim_fraction) share of served mass.
  const double keep = stats.served_mass * (1.0 - trim_fraction);
  double kept = 0.0;
  double kept_weighted = 0.0;
  for (const auto& [delay, mass] : stats.histogram) {
    const double take = std::min(mass, keep - kept);
    if (take <= 0.0) break;
    kept += take;
    kept_weighted += static_cast<double>(delay) * take;
  }
  stats.trimmed = kept > 0.0 ? std::min(kept_weighted / kept, stats.average) : 0.0;
  return stats;
}

}  // namespace plc
