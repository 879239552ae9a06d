#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tollcast/core/datetime.hpp"
#include "tollcast/core/time_grid.hpp"
#include "tollcast/ingest/feeds.hpp"

namespace tollcast::fusion {

/// One value per grid bin; nullopt marks a missing bin.
using Series = std::vector<std::optional<double>>;

/// Forward-fills each run of missing values of length <= max_gap from the
/// value preceding it. Longer runs, and runs with nothing before them, stay
/// missing.
Series impute_series(Series series, int max_gap);

/// Lane-summed vehicle counts per 15-minute period start. A period is present
/// only when every lane seen for the station reported.
std::map<LocalDateTime, double> lane_totals(const std::vector<ingest::VolumeFeedRecord>& records,
                                            const std::string& station_id);

/// Maps 15-minute period totals onto 6-minute bins. Each period total is read
/// as a constant flow rate; a bin receives rate * overlap, so a bin straddling
/// two periods mixes both. Bins touching a missing period are missing.
Series resample_volume(const std::map<LocalDateTime, double>& period_totals,
                       const TimeGrid& grid);

}  // namespace tollcast::fusion
