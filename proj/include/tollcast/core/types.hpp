#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tollcast {

/// Index of a 6-minute bin on a TimeGrid.
using IntervalIndex = std::int64_t;

enum class Direction : std::uint8_t { EB, WB };

enum class TargetKind : std::uint8_t { TollPrice, TravelTimeDifference };

std::string_view to_string(Direction d);
std::string_view to_string(TargetKind k);
Direction parse_direction(std::string_view s);
/// Accepts `toll` / `ttdiff` (CLI spelling) and the enum names.
TargetKind parse_target_kind(std::string_view s);

inline constexpr int kStepMinutes = 6;
inline constexpr int kIntervalsPerDay = 1440 / kStepMinutes;
inline constexpr int kHorizonCount = 5;

/// Prediction horizon h in {1..5}: the bin t + 6h minutes.
class HorizonIndex {
 public:
  constexpr explicit HorizonIndex(int h) : h_(h) {
    if (h < 1 || h > kHorizonCount) throw std::out_of_range("horizon must be in 1..5");
  }
  constexpr int value() const { return h_; }
  constexpr int minutes() const { return h_ * kStepMinutes; }
  constexpr auto operator<=>(const HorizonIndex&) const = default;

  static constexpr std::array<HorizonIndex, kHorizonCount> all() {
    return {HorizonIndex{1}, HorizonIndex{2}, HorizonIndex{3}, HorizonIndex{4}, HorizonIndex{5}};
  }

 private:
  int h_;
};

}  // namespace tollcast
