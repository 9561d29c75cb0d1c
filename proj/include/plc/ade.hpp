#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "plc/model.hpp"
#include "plc/prediction.hpp"

namespace plc {

/// Sentinel for an unbounded confidence length: the history branch of the
/// estimate is never taken.
inline constexpr Slot kInfiniteLength = std::numeric_limits<Slot>::max();

struct AdeParams {
  Slot confidence_length = kInfiniteLength;  // T_l
  Slot detection_window = 1;                 // d
  double threshold = 0.1;                    // eps_d, total-variation units
  Index num_states = 1;                      // M
  std::vector<double> error_curve{0.0};      // e(0..w)

  Slot horizon() const { return static_cast<Slot>(error_curve.size()) - 1; }  // w
  void validate() const;
};

struct AdeEvents {
  bool change_detected = false;  // step (i): history and recent windows disagree
  bool reset_point = false;      // step (ii): prediction disagrees with a full history window
  bool frozen = false;           // step (iii): windows held after a restart

  bool restarted() const { return change_detected || reset_point; }
};

/// Average distribution estimate with two-window change detection.
///
/// The recent window W_d(t) holds the observed samples in
/// [(t+w+1-d)_+, t-1] followed by the w+1 predicted laws, d terms when full.
/// The history window W_m(t) holds the observed samples in
/// [b_m, min(b_d^s, b_m + T_l)), so it never overlaps W_d and saturates at
/// exactly T_l samples. Once saturated its empirical law is frozen until the
/// next restart.
class AdeEstimator {
 public:
  explicit AdeEstimator(AdeParams params);

  /// Advances to slot t (called once per slot, t = 0, 1, 2, ...). `sample` is
  /// the state observed at t; `prediction` covers t .. t+w.
  AdeEvents update(Slot t, Index sample, const PredictionWindow& prediction);

  /// pi_a(t): the frozen history law when W_m(t) >= T_l, else the average of
  /// the w+1 predicted laws.
  Distribution estimate(const PredictionWindow& prediction) const;
  bool using_history() const { return history_size() >= params_.confidence_length; }

  /// Empirical law of W_m(t); empty when the window holds no samples.
  std::optional<Distribution> empirical_m() const;
  /// Blend of observed samples and predictions over W_d(t), normalized by
  /// the number of terms actually present.
  Distribution empirical_d(const PredictionWindow& prediction) const;

  Slot history_size() const { return m_end_ - b_m_; }             // W_m(t)
  Slot detection_size() const { return b_d_end_ - b_d_start_ + 1; }  // W_d(t)
  Slot b_m() const { return b_m_; }
  Slot b_d_start() const { return b_d_start_; }
  Slot b_d_end() const { return b_d_end_; }
  Slot current_slot() const { return t_; }

  /// Restart slots t+w+1 for every step (i) or step (ii) firing.
  const std::vector<Slot>& restarts() const { return restarts_; }
  /// Slots marked as reset points by step (ii).
  const std::vector<Slot>& reset_points() const { return reset_points_; }

  const AdeParams& params() const { return params_; }

  /// Throws std::logic_error if the window spans are inconsistent.
  void check_invariants() const;

 private:
  Index sample_at(Slot s) const;
  void restart(Slot t);

  AdeParams params_;
  double history_margin_ = 0.0;  // 2 M log(T_l) / sqrt(T_l)

  Slot t_ = -1;
  Slot b_m_ = 0;
  Slot b_d_start_ = -1;
  Slot b_d_end_ = -1;

  std::vector<Index> ring_;

  Vector counts_d_;  // observed samples in [d_lo_, d_hi_)
  Slot d_lo_ = 0;
  Slot d_hi_ = 0;

  Vector counts_m_;  // observed samples in [b_m_, m_end_)
  Slot m_end_ = 0;
  std::optional<Distribution> frozen_m_;

  std::vector<Slot> restarts_;
  std::vector<Slot> reset_points_;
};

/// Frequency vector of `samples` over `num_states` states.
Distribution empirical_distribution(const std::vector<Index>& samples, Index num_states);

}  // namespace plc
