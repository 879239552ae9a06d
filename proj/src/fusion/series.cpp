#include "tollcast/fusion/series.hpp"

#include <set>
#include <stdexcept>

namespace tollcast::fusion {

Series impute_series(Series series, int max_gap) {
  if (max_gap < 0) throw std::invalid_argument("max_gap must be >= 0");
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    if (series[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !series[j]) ++j;
    const std::size_t run = j - i;
    if (i > 0 && run <= static_cast<std::size_t>(max_gap)) {
      const auto fill = series[i - 1];
      for (std::size_t k = i; k < j; ++k) series[k] = fill;
    }
    i = j;
  }
  return series;
}

std::map<LocalDateTime, double> lane_totals(const std::vector<ingest::VolumeFeedRecord>& records,
                                            const std::string& station_id) {
  std::set<std::string> lanes;
  for (const auto& r : records) {
    if (r.station_id == station_id) lanes.insert(r.lane_id);
  }
  std::map<LocalDateTime, std::pair<double, std::set<std::string>>> acc;
  for (const auto& r : records) {
    if (r.station_id != station_id) continue;
    auto& slot = acc[r.period_start];
    // Records arrive deduplicated, so each lane contributes once.
    if (slot.second.insert(r.lane_id).second) slot.first += static_cast<double>(r.count);
  }
  std::map<LocalDateTime, double> out;
  for (const auto& [t, v] : acc) {
    if (v.second.size() == lanes.size()) out.emplace(t, v.first);
  }
  return out;
}

Series resample_volume(const std::map<LocalDateTime, double>& period_totals,
                       const TimeGrid& grid) {
  constexpr int kPeriod = ingest::kVolumePeriodMinutes;
  Series out(static_cast<std::size_t>(grid.interval_count()));
  for (IntervalIndex b = 0; b < grid.interval_count(); ++b) {
    const LocalDateTime bin_start = grid.timestamp_of(b);
    const std::int64_t lo = bin_start.minutes();
    const std::int64_t hi = lo + kStepMinutes;
    // Period starts overlapping [lo, hi).
    std::int64_t p = lo - (((lo % kPeriod) + kPeriod) % kPeriod);
    double vehicles = 0.0;
    bool complete = true;
    for (; p < hi; p += kPeriod) {
      auto it = period_totals.find(LocalDateTime{p});
      if (it == period_totals.end()) {
        complete = false;
        break;
      }
      const std::int64_t overlap = std::min(hi, p + kPeriod) - std::max(lo, p);
      vehicles += it->second * static_cast<double>(overlap) / kPeriod;
    }
    if (complete) out[static_cast<std::size_t>(b)] = vehicles;
  }
  return out;
}

}  // namespace tollcast::fusion
