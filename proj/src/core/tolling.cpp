#include "tollcast/core/tolling.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace tollcast {

TollingWindow::TollingWindow(Direction dir, ClockTime start, ClockTime end, DayMask days)
    : direction(dir), daily_start(start), daily_end(end), active_days(days) {
  if (!(start < end)) {
    throw std::invalid_argument(
        fmt::format("tolling window start {} must precede end {}", start.str(), end.str()));
  }
}

bool TollingWindow::covers(LocalDateTime ts) const {
  if (!active_on(ts.date())) return false;
  const int m = ts.minute_of_day();
  return m >= daily_start.minutes && m < daily_end.minutes;
}

std::vector<TollingWindow> default_tolling_windows() {
  return {TollingWindow{Direction::EB, ClockTime::hm(5, 30), ClockTime::hm(9, 30)},
          TollingWindow{Direction::WB, ClockTime::hm(15, 0), ClockTime::hm(19, 0)}};
}

void validate_windows(std::span<const TollingWindow> windows) {
  for (const auto& a : windows) {
    if (!(a.daily_start < a.daily_end)) {
      throw std::invalid_argument("tolling window start must precede end");
    }
    for (const auto& b : windows) {
      if (a.direction == b.direction) continue;
      if ((a.active_days & b.active_days).none()) continue;
      if (a.daily_start < b.daily_end && b.daily_start < a.daily_end) {
        throw std::invalid_argument(fmt::format(
            "tolling windows overlap: {} {}-{} and {} {}-{}", to_string(a.direction),
            a.daily_start.str(), a.daily_end.str(), to_string(b.direction), b.daily_start.str(),
            b.daily_end.str()));
      }
    }
  }
}

bool is_tolling(LocalDateTime ts, Direction dir, std::span<const TollingWindow> windows) {
  for (const auto& w : windows) {
    if (w.direction == dir && w.covers(ts)) return true;
  }
  return false;
}

std::vector<IntervalIndex> tolling_intervals(const TimeGrid& grid,
                                             std::span<const TollingWindow> windows,
                                             Direction dir) {
  std::vector<IntervalIndex> out;
  for (IntervalIndex i = 0; i < grid.interval_count(); ++i) {
    const LocalDateTime ts = grid.timestamp_of(i);
    if (is_tolling(ts, dir, windows) && !in_dst_transition(ts)) out.push_back(i);
  }
  return out;
}

}  // namespace tollcast
