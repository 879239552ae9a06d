#include "tollcast/core/route.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "tollcast/core/csv.hpp"

namespace tollcast {

RouteSpec::RouteSpec(std::string route_id, Direction direction,
                     std::vector<RouteSegment> segments)
    : route_id_(std::move(route_id)), direction_(direction), segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw std::invalid_argument(fmt::format("route {} has no segments", route_id_));
  }
  std::set<std::string> seen;
  for (const auto& s : segments_) {
    if (!(s.length_miles > 0.0) || !std::isfinite(s.length_miles)) {
      throw std::invalid_argument(
          fmt::format("segment {} on route {} has nonpositive length", s.segment_id, route_id_));
    }
    if (!seen.insert(s.segment_id).second) {
      throw std::invalid_argument(
          fmt::format("segment {} repeated on route {}", s.segment_id, route_id_));
    }
    total_length_ += s.length_miles;
  }
}

RouteSet::RouteSet(RouteSpec toll_route, std::vector<RouteSpec> alts)
    : toll(std::move(toll_route)), alternatives(std::move(alts)) {
  if (alternatives.empty()) throw std::invalid_argument("need at least one alternative route");
  std::set<std::string> ids;
  auto claim = [&](const RouteSpec& r) {
    if (r.direction() != toll.direction()) {
      throw std::invalid_argument(
          fmt::format("route {} direction differs from toll route", r.route_id()));
    }
    for (const auto& s : r.segments()) {
      if (!ids.insert(s.segment_id).second) {
        throw std::invalid_argument(
            fmt::format("segment {} appears in more than one route", s.segment_id));
      }
    }
  };
  claim(toll);
  for (const auto& r : alternatives) claim(r);
}

namespace {

struct PendingRoute {
  std::string id;
  bool is_toll = false;
  Direction dir = Direction::EB;
  std::vector<RouteSegment> segments;
};

}  // namespace

RouteSet read_routes_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  const std::vector<std::string> expected{"route_id", "role", "direction", "segment_id",
                                          "length_miles"};
  if (!header || header->fields != expected) {
    throw std::runtime_error("routes file: expected header route_id,role,direction,segment_id,length_miles");
  }
  std::vector<PendingRoute> pending;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != 5) {
      throw std::runtime_error(fmt::format("routes file line {}: expected 5 fields", row->line));
    }
    const auto& f = row->fields;
    double len = 0.0;
    auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), len);
    if (ec != std::errc{} || p != f[4].data() + f[4].size()) {
      throw std::runtime_error(fmt::format("routes file line {}: bad length '{}'", row->line, f[4]));
    }
    if (f[1] != "toll" && f[1] != "alt") {
      throw std::runtime_error(fmt::format("routes file line {}: role must be toll or alt", row->line));
    }
    if (pending.empty() || pending.back().id != f[0]) {
      pending.push_back({f[0], f[1] == "toll", parse_direction(f[2]), {}});
    }
    pending.back().segments.push_back({f[3], len});
  }
  std::optional<RouteSpec> toll;
  std::vector<RouteSpec> alts;
  for (auto& r : pending) {
    RouteSpec spec{r.id, r.dir, std::move(r.segments)};
    if (r.is_toll) {
      if (toll) throw std::runtime_error("routes file: more than one toll route");
      toll = std::move(spec);
    } else {
      alts.push_back(std::move(spec));
    }
  }
  if (!toll) throw std::runtime_error("routes file: no toll route");
  return RouteSet{std::move(*toll), std::move(alts)};
}

void write_routes_csv(std::ostream& out, const RouteSet& routes) {
  out << "route_id,role,direction,segment_id,length_miles\n";
  auto emit = [&](const RouteSpec& r, const char* role) {
    for (const auto& s : r.segments()) {
      csv::write_row(out, {r.route_id(), role, std::string(to_string(r.direction())),
                           s.segment_id, fmt::format("{}", s.length_miles)});
    }
  };
  emit(routes.toll, "toll");
  for (const auto& r : routes.alternatives) emit(r, "alt");
}

}  // namespace tollcast
