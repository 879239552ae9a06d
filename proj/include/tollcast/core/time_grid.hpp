#pragma once

#include <cstdint>
#include <vector>

#include "tollcast/core/datetime.hpp"
#include "tollcast/core/types.hpp"

namespace tollcast {

/// Fixed 6-minute discretization. Bins are wall-clock; a calendar day always
/// holds 240 bins, and bins falling inside a DST transition hour are reported
/// by `dropped()` so callers can skip them.
class TimeGrid {
 public:
  TimeGrid(LocalDateTime start, std::int64_t interval_count);

  /// Grid covering whole days [first, first + n_days).
  static TimeGrid for_days(Date first, int n_days);

  LocalDateTime start() const { return start_; }
  int step_minutes() const { return kStepMinutes; }
  std::int64_t interval_count() const { return count_; }
  LocalDateTime end() const { return start_.plus_minutes(count_ * kStepMinutes); }

  bool contains(LocalDateTime ts) const { return ts >= start_ && ts < end(); }

  /// floor((ts - start) / 6 min); throws std::out_of_range outside the span.
  IntervalIndex interval_of(LocalDateTime ts) const;
  LocalDateTime timestamp_of(IntervalIndex idx) const;

  /// Bin overlaps a nonexistent or repeated DST hour.
  bool dropped(IntervalIndex idx) const;
  std::vector<IntervalIndex> dropped_bins() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  LocalDateTime start_;
  std::int64_t count_;
};

}  // namespace tollcast
