#include "plc/schedule.hpp"

#include <algorithm>

namespace plc {

DistributionSchedule::DistributionSchedule(std::vector<ScheduleSegment> segments, Slot horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (segments_.empty()) throw ParameterError("DistributionSchedule: no segments");
  if (segments_.front().start != 0) {
    throw ParameterError("DistributionSchedule: first segment must start at slot 0");
  }
  for (std::size_t k = 1; k < segments_.size(); ++k) {
    if (segments_[k].start <= segments_[k - 1].start) {
      throw ParameterError("DistributionSchedule: segment starts must be strictly increasing");
    }
    if (segments_[k].dist.size() != segments_[0].dist.size()) {
      throw DimensionError("DistributionSchedule: segments disagree on state count");
    }
  }
  if (horizon_ <= 0) throw ParameterError("DistributionSchedule: horizon must be > 0");
}

DistributionSchedule DistributionSchedule::stationary(Distribution dist, Slot horizon) {
  return DistributionSchedule({ScheduleSegment{0, std::move(dist)}}, horizon);
}

const Distribution& DistributionSchedule::at(Slot t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](Slot v, const ScheduleSegment& s) { return v < s.start; });
  if (it == segments_.begin()) return segments_.front().dist;
  return std::prev(it)->dist;
}

std::vector<Slot> DistributionSchedule::change_points() const {
  std::vector<Slot> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].start);
  return out;
}

}  // namespace plc
