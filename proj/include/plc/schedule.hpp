#pragma once

#include <cstdint>
#include <vector>

#include "plc/model.hpp"

namespace plc {

using Slot = std::int64_t;

struct ScheduleSegment {
  Slot start = 0;
  Distribution dist;
};

/// Piecewise-stationary state law: segment k is active on [start_k, start_{k+1}).
class DistributionSchedule {
 public:
  DistributionSchedule(std::vector<ScheduleSegment> segments, Slot horizon);

  static DistributionSchedule stationary(Distribution dist, Slot horizon);

  /// True law at slot t. Slots past the horizon keep the last segment's law,
  /// so prediction windows near the end stay defined.
  const Distribution& at(Slot t) const;

  Slot horizon() const { return horizon_; }
  Index num_states() const { return segments_.front().dist.size(); }
  const std::vector<ScheduleSegment>& segments() const { return segments_; }
  /// Start slots of every segment after the first.
  std::vector<Slot> change_points() const;

 private:
  std::vector<ScheduleSegment> segments_;
  Slot horizon_;
};

}  // namespace plc
