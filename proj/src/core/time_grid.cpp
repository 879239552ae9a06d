#include "tollcast/core/time_grid.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace tollcast {

static_assert(1440 % kStepMinutes == 0);

TimeGrid::TimeGrid(LocalDateTime start, std::int64_t interval_count)
    : start_(start), count_(interval_count) {
  if (interval_count <= 0) throw std::invalid_argument("grid needs at least one interval");
  if (start.minute_of_day() % kStepMinutes != 0) {
    throw std::invalid_argument(
        fmt::format("grid start {} is not on a 6-minute boundary", start.str()));
  }
}

TimeGrid TimeGrid::for_days(Date first, int n_days) {
  if (n_days <= 0) throw std::invalid_argument("grid needs at least one day");
  return TimeGrid{LocalDateTime{first, ClockTime{0}},
                  static_cast<std::int64_t>(n_days) * kIntervalsPerDay};
}

IntervalIndex TimeGrid::interval_of(LocalDateTime ts) const {
  if (!contains(ts)) {
    throw std::out_of_range(fmt::format("timestamp {} outside grid [{}, {})", ts.str(),
                                        start_.str(), end().str()));
  }
  return (ts - start_) / kStepMinutes;
}

LocalDateTime TimeGrid::timestamp_of(IntervalIndex idx) const {
  if (idx < 0 || idx >= count_) {
    throw std::out_of_range(fmt::format("interval {} outside grid of {}", idx, count_));
  }
  return start_.plus_minutes(idx * kStepMinutes);
}

bool TimeGrid::dropped(IntervalIndex idx) const {
  return in_dst_transition(timestamp_of(idx));
}

std::vector<IntervalIndex> TimeGrid::dropped_bins() const {
  std::vector<IntervalIndex> out;
  for (IntervalIndex i = 0; i < count_; ++i) {
    if (dropped(i)) out.push_back(i);
  }
  return out;
}

}  // namespace tollcast
