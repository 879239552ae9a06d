#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tollcast/core/types.hpp"

namespace tollcast {

struct RouteSegment {
  std::string segment_id;
  double length_miles = 0.0;

  bool operator==(const RouteSegment&) const = default;
};

/// Ordered chain of probe segments making up one directional route.
class RouteSpec {
 public:
  RouteSpec(std::string route_id, Direction direction, std::vector<RouteSegment> segments);

  const std::string& route_id() const { return route_id_; }
  Direction direction() const { return direction_; }
  const std::vector<RouteSegment>& segments() const { return segments_; }
  double total_length() const { return total_length_; }

  bool operator==(const RouteSpec&) const = default;

 private:
  std::string route_id_;
  Direction direction_;
  std::vector<RouteSegment> segments_;
  double total_length_ = 0.0;
};

/// The tolled route plus its competing alternatives. Segment ids are unique
/// across the whole set.
struct RouteSet {
  RouteSpec toll;
  std::vector<RouteSpec> alternatives;

  RouteSet(RouteSpec toll_route, std::vector<RouteSpec> alts);
  Direction direction() const { return toll.direction(); }
};

/// CSV `route_id,role,direction,segment_id,length_miles`, role in {toll, alt},
/// segment rows in route order.
RouteSet read_routes_csv(std::istream& in);
void write_routes_csv(std::ostream& out, const RouteSet& routes);

}  // namespace tollcast
