#pragma once

#include <random>
#include <vector>

#include "plc/model.hpp"
#include "plc/schedule.hpp"

namespace plc {

using Rng = std::mt19937_64;

/// Distribution-accuracy curve: entry k bounds the total-variation error of
/// the prediction for slot t+k. The window covers w+1 slots.
struct PredictionProfile {
  std::vector<double> error_curve{0.0};

  static PredictionProfile constant(double error, Index window_size);

  Index window_size() const { return static_cast<Index>(error_curve.size()); }
  Index horizon() const { return window_size() - 1; }  // w
  void validate() const;
};

double average_error(const PredictionProfile& profile);

/// Predicted laws for slots base_time .. base_time + w.
struct PredictionWindow {
  Slot base_time = 0;
  std::vector<Distribution> predicted;

  Index window_size() const { return static_cast<Index>(predicted.size()); }
  /// Unweighted average of the w+1 predicted laws.
  Vector mean() const;
};

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& x);

/// Draws an imperfect prediction of the schedule's true future. Each entry is
/// the true law perturbed along a uniformly random zero-sum direction with an
/// L1 radius drawn uniformly from [0, e(k)], projected back onto the simplex
/// and shrunk toward the truth if the projection pushed it past e(k). The
/// total-variation bound therefore holds for every draw, not in expectation.
PredictionWindow synthesize_prediction(const DistributionSchedule& schedule, Slot t,
                                       const PredictionProfile& profile, Rng& rng);

}  // namespace plc
