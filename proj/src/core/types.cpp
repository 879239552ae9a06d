#include "tollcast/core/types.hpp"

#include <fmt/core.h>

#include "tollcast/core/money.hpp"

namespace tollcast {

std::string_view to_string(Direction d) { return d == Direction::EB ? "EB" : "WB"; }

std::string_view to_string(TargetKind k) {
  return k == TargetKind::TollPrice ? "toll" : "ttdiff";
}

Direction parse_direction(std::string_view s) {
  if (s == "EB" || s == "eb") return Direction::EB;
  if (s == "WB" || s == "wb") return Direction::WB;
  throw std::invalid_argument(fmt::format("unknown direction '{}'", s));
}

TargetKind parse_target_kind(std::string_view s) {
  if (s == "toll" || s == "TollPrice") return TargetKind::TollPrice;
  if (s == "ttdiff" || s == "TravelTimeDifference") return TargetKind::TravelTimeDifference;
  throw std::invalid_argument(fmt::format("unknown target kind '{}'", s));
}

std::string Money::str() const {
  return fmt::format("${}.{:02d}", cents_ / 100, cents_ % 100);
}

}  // namespace tollcast
