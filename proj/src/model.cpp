#include "plc/model.hpp"

#include <cmath>
#include <sstream>

namespace plc {

Distribution::Distribution(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) {
    throw ParameterError("Distribution: empty probability vector");
  }
  for (Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
      throw ParameterError("Distribution: entry " + std::to_string(i) +
                           " must be finite and >= 0");
    }
  }
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "Distribution: entries sum to " << sum << ", expected 1 within " << kSumTolerance;
    throw ParameterError(os.str());
  }
}

Distribution Distribution::uniform(Index num_states) {
  return Distribution(Vector::Constant(num_states, 1.0 / static_cast<double>(num_states)));
}

Distribution Distribution::point_mass(Index num_states, Index state) {
  if (state < 0 || state >= num_states) {
    throw DomainError("Distribution::point_mass: state out of range");
  }
  Vector p = Vector::Zero(num_states);
  p[state] = 1.0;
  return Distribution(std::move(p));
}

Distribution Distribution::normalized(const Vector& weights) {
  if ((weights.array() < 0.0).any()) {
    throw ParameterError("Distribution::normalized: negative weight");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw ParameterError("Distribution::normalized: weights sum to zero");
  }
  return Distribution(weights / total);
}

SystemModel::SystemModel(std::vector<std::string> state_labels,
                         std::vector<std::vector<std::string>> action_labels, Index num_queues,
                         const CostFn& cost, const FlowFn& traffic, const FlowFn& service,
                         double delta_max)
    : state_labels_(std::move(state_labels)),
      action_labels_(std::move(action_labels)),
      num_queues_(num_queues),
      delta_max_(delta_max) {
  if (state_labels_.empty()) throw ParameterError("SystemModel: at least one state required");
  if (action_labels_.size() != state_labels_.size()) {
    throw DimensionError("SystemModel: one action list per state required");
  }
  if (num_queues_ < 1) throw ParameterError("SystemModel: num_queues must be >= 1");
  if (!(delta_max_ > 0.0) || !std::isfinite(delta_max_)) {
    throw ParameterError("SystemModel: delta_max must be finite and > 0");
  }

  const Index m = num_states();
  tables_.resize(static_cast<std::size_t>(m));
  for (Index s = 0; s < m; ++s) {
    const auto& labels = action_labels_[static_cast<std::size_t>(s)];
    const auto n = static_cast<Index>(labels.size());
    if (n == 0) {
      throw ParameterError("SystemModel: action set of state '" + state_labels_[s] +
                           "' must be nonempty");
    }
    StateTable& table = tables_[static_cast<std::size_t>(s)];
    table.costs.resize(n);
    table.arrivals.resize(n, num_queues_);
    table.services.resize(n, num_queues_);
    for (Index a = 0; a < n; ++a) {
      table.costs[a] = cost(s, a);
      for (Index j = 0; j < num_queues_; ++j) {
        table.arrivals(a, j) = traffic(s, a, j);
        table.services(a, j) = service(s, a, j);
      }
    }
    table.drift = table.arrivals - table.services;

    auto bounded = [this](double v) { return std::isfinite(v) && std::abs(v) <= delta_max_; };
    for (Index a = 0; a < n; ++a) {
      bool ok = bounded(table.costs[a]) && table.costs[a] >= 0.0;
      for (Index j = 0; j < num_queues_; ++j) {
        ok = ok && bounded(table.arrivals(a, j)) && table.arrivals(a, j) >= 0.0 &&
             bounded(table.services(a, j)) && table.services(a, j) >= 0.0;
      }
      if (!ok) {
        throw ParameterError("SystemModel: |f|, A_j, mu_j must be nonnegative and <= delta_max at state '" +
                             state_labels_[s] + "', action '" + labels[a] + "'");
      }
    }
  }
}

std::size_t SystemModel::check_state(Index state) const {
  if (state < 0 || state >= num_states()) {
    throw DomainError("SystemModel: unknown state index " + std::to_string(state));
  }
  return static_cast<std::size_t>(state);
}

Index SystemModel::num_actions(Index state) const {
  return static_cast<Index>(action_labels_[check_state(state)].size());
}

const std::string& SystemModel::state_label(Index state) const {
  return state_labels_[check_state(state)];
}

const std::string& SystemModel::action_label(Index state, Index action) const {
  const auto& labels = action_labels_[check_state(state)];
  if (action < 0 || action >= static_cast<Index>(labels.size())) {
    throw DomainError("SystemModel: unknown action index " + std::to_string(action));
  }
  return labels[static_cast<std::size_t>(action)];
}

ActionOutcome SystemModel::evaluate(Index state, Index action) const {
  const StateTable& table = tables_[check_state(state)];
  if (action < 0 || action >= table.costs.size()) {
    throw DomainError("SystemModel: unknown action index " + std::to_string(action) +
                      " for state '" + state_labels_[static_cast<std::size_t>(state)] + "'");
  }
  return ActionOutcome{table.costs[action], table.arrivals.row(action).transpose(),
                       table.services.row(action).transpose()};
}

TwoQueueState two_queue_state(Index index) {
  if (index < 0 || index >= kTwoQueueStates) {
    throw DomainError("two_queue_state: index out of range");
  }
  const int i = static_cast<int>(index);
  return TwoQueueState{(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, (i & 1) + 1};
}

Index two_queue_state_index(const TwoQueueState& s) {
  auto bit = [](int v) { return v == 0 || v == 1; };
  if (!bit(s.a1) || !bit(s.a2) || !bit(s.ch1) || (s.ch2 != 1 && s.ch2 != 2)) {
    throw DomainError("two_queue_state_index: component out of range");
  }
  return 8 * s.a1 + 4 * s.a2 + 2 * s.ch1 + (s.ch2 - 1);
}

Index two_queue_action_index(int target_queue, int power) {
  if ((target_queue != 1 && target_queue != 2) || power < 0 || power > 2) {
    throw DomainError("two_queue_action_index: target in {1,2}, power in {0,1,2}");
  }
  return 3 * (target_queue - 1) + power;
}

SystemModel build_two_queue_preset() {
  std::vector<std::string> states;
  std::vector<std::vector<std::string>> actions;
  for (Index i = 0; i < kTwoQueueStates; ++i) {
    const TwoQueueState s = two_queue_state(i);
    states.push_back("A1=" + std::to_string(s.a1) + ",A2=" + std::to_string(s.a2) +
                     ",CH1=" + std::to_string(s.ch1) + ",CH2=" + std::to_string(s.ch2));
    std::vector<std::string> labels;
    for (int target = 1; target <= 2; ++target) {
      for (int power = 0; power <= 2; ++power) {
        labels.push_back("serve" + std::to_string(target) + ",P=" + std::to_string(power));
      }
    }
    actions.push_back(std::move(labels));
  }

  auto power_of = [](Index a) { return static_cast<double>(a % 3); };
  auto target_of = [](Index a) { return a / 3; };

  const SystemModel::CostFn cost = [=](Index, Index a) { return power_of(a); };
  const SystemModel::FlowFn traffic = [](Index s, Index, Index j) {
    const TwoQueueState st = two_queue_state(s);
    return static_cast<double>(j == 0 ? st.a1 : st.a2);
  };
  const SystemModel::FlowFn service = [=](Index s, Index a, Index j) {
    if (target_of(a) != j) return 0.0;
    const TwoQueueState st = two_queue_state(s);
    const double channel = (j == 0) ? st.ch1 : st.ch2;
    return std::log(1.0 + channel * power_of(a));
  };
  return SystemModel(std::move(states), std::move(actions), 2, cost, traffic, service, 2.0);
}

Distribution two_queue_distribution(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0)) {
    throw ParameterError("two_queue_distribution: arrival probabilities must lie in [0,1]");
  }
  Vector probs(kTwoQueueStates);
  for (Index i = 0; i < kTwoQueueStates; ++i) {
    const TwoQueueState s = two_queue_state(i);
    probs[i] = (s.a1 ? p1 : 1.0 - p1) * (s.a2 ? p2 : 1.0 - p2) * 0.25;
  }
  return Distribution(std::move(probs));
}

}  // namespace plc
