#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "plc/error.hpp"

namespace plc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Total variation distance in the sum-of-absolute-differences convention,
/// so the result lies in [0, 2] for two probability vectors.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar total_variation(const Eigen::MatrixBase<DerivedP>& p,
                                          const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size()) {
    throw DimensionError("total_variation: length mismatch (" + std::to_string(p.size()) +
                         " vs " + std::to_string(q.size()) + ")");
  }
  return (p - q).cwiseAbs().sum();
}

/// Probability vector over the M system states, indexed in the model's
/// canonical state order. Construction validates the simplex invariant.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;
  explicit Distribution(Vector probs);

  static Distribution uniform(Index num_states);
  static Distribution point_mass(Index num_states, Index state);
  /// Rescales nonnegative weights to sum to one.
  static Distribution normalized(const Vector& weights);

  Index size() const { return probs_.size(); }
  double operator[](Index i) const { return probs_[i]; }
  const Vector& probs() const { return probs_; }

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.probs_.size() == b.probs_.size() && a.probs_ == b.probs_;
  }

 private:
  Vector probs_;
};

inline double total_variation(const Distribution& p, const Distribution& q) {
  return total_variation(p.probs(), q.probs());
}

/// Cost, per-queue arrivals, and per-queue service produced by one action.
struct ActionOutcome {
  double cost = 0.0;
  Vector arrivals;
  Vector services;
};

/// One slot of the fluid queue recurrence q' = max(q - mu + A, 0). Service and
/// arrivals are netted before the floor.
template <typename Derived>
Vector queue_update(const Eigen::MatrixBase<Derived>& q, const ActionOutcome& outcome) {
  if (q.size() != outcome.arrivals.size() || q.size() != outcome.services.size()) {
    throw DimensionError("queue_update: queue/outcome length mismatch");
  }
  return (q - outcome.services + outcome.arrivals).cwiseMax(0.0);
}

/// Finite-action network model. The cost, traffic and service functions are
/// tabulated at construction; every query afterwards is a table lookup.
class SystemModel {
 public:
  using CostFn = std::function<double(Index state, Index action)>;
  using FlowFn = std::function<double(Index state, Index action, Index queue)>;

  SystemModel(std::vector<std::string> state_labels,
              std::vector<std::vector<std::string>> action_labels, Index num_queues,
              const CostFn& cost, const FlowFn& traffic, const FlowFn& service,
              double delta_max);

  Index num_states() const { return static_cast<Index>(state_labels_.size()); }
  Index num_queues() const { return num_queues_; }
  Index num_actions(Index state) const;
  double delta_max() const { return delta_max_; }

  const std::string& state_label(Index state) const;
  const std::string& action_label(Index state, Index action) const;

  /// Per-state tables: costs has one entry per action; arrivals, services
  /// and drift (arrivals - services) have one row per action.
  const Vector& costs(Index state) const { return tables_.at(check_state(state)).costs; }
  const Matrix& arrivals(Index state) const { return tables_.at(check_state(state)).arrivals; }
  const Matrix& services(Index state) const { return tables_.at(check_state(state)).services; }
  const Matrix& drift(Index state) const { return tables_.at(check_state(state)).drift; }

  ActionOutcome evaluate(Index state, Index action) const;

 private:
  struct StateTable {
    Vector costs;
    Matrix arrivals;
    Matrix services;
    Matrix drift;
  };

  std::size_t check_state(Index state) const;

  std::vector<std::string> state_labels_;
  std::vector<std::vector<std::string>> action_labels_;
  Index num_queues_;
  double delta_max_;
  std::vector<StateTable> tables_;
};

inline ActionOutcome evaluate_action(const SystemModel& model, Index state, Index action) {
  return model.evaluate(state, action);
}

// Two-queue downlink preset.
//
// States enumerate (A1, A2, CH1, CH2) in {0,1} x {0,1} x {0,1} x {1,2},
// lexicographically: index = 8*A1 + 4*A2 + 2*CH1 + (CH2 - 1).
// Actions enumerate (target queue, power) in {1,2} x {0,1,2}:
// index = 3*(target - 1) + power.

struct TwoQueueState {
  int a1 = 0;
  int a2 = 0;
  int ch1 = 0;
  int ch2 = 1;
};

inline constexpr Index kTwoQueueStates = 16;
inline constexpr Index kTwoQueueActions = 6;

TwoQueueState two_queue_state(Index index);
Index two_queue_state_index(const TwoQueueState& s);
Index two_queue_action_index(int target_queue, int power);

SystemModel build_two_queue_preset();

/// Product law with Bernoulli(p1), Bernoulli(p2) arrivals and uniform channels.
Distribution two_queue_distribution(double p1, double p2);

}  // namespace plc
