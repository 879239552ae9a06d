#pragma once

#include <bitset>
#include <span>
#include <vector>

#include "tollcast/core/datetime.hpp"
#include "tollcast/core/time_grid.hpp"
#include "tollcast/core/types.hpp"

namespace tollcast {

/// Weekday mask, bit 0 = Monday.
using DayMask = std::bitset<7>;

inline const DayMask kWeekdays{0b0011111};
inline const DayMask kAllDays{0b1111111};

/// Daily tolling period [daily_start, daily_end) for one direction.
struct TollingWindow {
  Direction direction = Direction::EB;
  ClockTime daily_start;
  ClockTime daily_end;
  DayMask active_days = kWeekdays;

  TollingWindow() = default;
  TollingWindow(Direction dir, ClockTime start, ClockTime end, DayMask days = kWeekdays);

  bool active_on(Date d) const { return active_days.test(static_cast<std::size_t>(d.weekday())); }
  bool covers(LocalDateTime ts) const;
  int bins_per_day() const { return (daily_end.minutes - daily_start.minutes) / kStepMinutes; }
};

/// I-66 inside the Beltway: EB 05:30-09:30, WB 15:00-19:00, weekdays.
std::vector<TollingWindow> default_tolling_windows();

/// Throws if opposite-direction windows overlap on a shared active day.
void validate_windows(std::span<const TollingWindow> windows);

bool is_tolling(LocalDateTime ts, Direction dir, std::span<const TollingWindow> windows);

/// Grid indices whose bin start is tolling for `dir`, ascending. DST-dropped
/// bins are excluded.
std::vector<IntervalIndex> tolling_intervals(const TimeGrid& grid,
                                             std::span<const TollingWindow> windows,
                                             Direction dir);

}  // namespace tollcast
