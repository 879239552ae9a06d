#include "tollcast/fusion/travel_time.hpp"

#include <cmath>
#include <stdexcept>

namespace tollcast::fusion {

double space_mean_speed(std::span<const SegmentObservation> segments) {
  if (segments.empty()) throw std::invalid_argument("space_mean_speed: no segments");
  double length = 0.0;
  double hours = 0.0;
  for (const auto& s : segments) {
    if (!(s.length_miles > 0.0) || !(s.speed_mph > 0.0)) {
      throw std::invalid_argument("space_mean_speed: lengths and speeds must be positive");
    }
    length += s.length_miles;
    hours += s.length_miles / s.speed_mph;
  }
  return length / hours;
}

std::optional<double> route_travel_time(const RouteSpec& route,
                                        std::span<const std::optional<double>> speeds) {
  const auto& segs = route.segments();
  if (speeds.size() != segs.size()) {
    throw std::invalid_argument("route_travel_time: one speed per segment required");
  }
  std::vector<SegmentObservation> obs;
  obs.reserve(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!speeds[i]) return std::nullopt;
    obs.push_back({segs[i].length_miles, *speeds[i]});
  }
  return route.total_length() / space_mean_speed(obs) * 60.0;
}

std::optional<double> aggregate_minutes_to_interval(std::span<const double> minute_speeds) {
  if (minute_speeds.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : minute_speeds) sum += v;
  return sum / static_cast<double>(minute_speeds.size());
}

std::optional<double> travel_time_difference(double tt_toll,
                                             std::span<const std::optional<double>> alternatives) {
  std::optional<double> best;
  for (const auto& a : alternatives) {
    if (a && (!best || *a < *best)) best = *a;
  }
  if (!best) return std::nullopt;
  return *best - tt_toll;
}

}  // namespace tollcast::fusion
