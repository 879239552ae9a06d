#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tollcast/core/route.hpp"

namespace tollcast::fusion {

struct SegmentObservation {
  double length_miles = 0.0;
  double speed_mph = 0.0;
};

/// Length-weighted harmonic mean L / sum(l_i / v_i). Dividing the route length
/// by this speed gives the sum of per-segment traversal times.
/// Throws std::invalid_argument on an empty list or nonpositive inputs.
double space_mean_speed(std::span<const SegmentObservation> segments);

/// Route travel time in minutes, total_length / space_mean_speed * 60.
/// `speeds` is parallel to route.segments(); any missing speed yields nullopt.
std::optional<double> route_travel_time(const RouteSpec& route,
                                        std::span<const std::optional<double>> speeds);

/// Mean of the minute speeds observed inside one 6-minute bin.
std::optional<double> aggregate_minutes_to_interval(std::span<const double> minute_speeds);

/// min(alternatives) - tt_toll over the alternatives that are present;
/// positive means the toll road is faster.
std::optional<double> travel_time_difference(double tt_toll,
                                             std::span<const std::optional<double>> alternatives);

}  // namespace tollcast::fusion
