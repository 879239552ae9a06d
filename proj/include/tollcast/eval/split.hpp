#pragma once

#include <cstdint>
#include <vector>

#include "tollcast/core/datetime.hpp"

namespace tollcast::eval {

inline constexpr int kValidationDays = 21;
inline constexpr int kTestDaysPerMonth = 2;

struct SplitAssignment {
  std::vector<Date> train_days;
  std::vector<Date> validation_days;
  std::vector<Date> test_days;
  std::uint64_t seed = 0;

  bool operator==(const SplitAssignment&) const = default;
};

/// Validation is every dataset day in the final 21 calendar days of the span.
/// Test is 2 days drawn without replacement from each calendar month's
/// non-validation days. Train is the rest. All lists come back sorted.
/// Throws if the span covers fewer than 2 months or a month has fewer than 2
/// eligible days.
SplitAssignment make_split(std::vector<Date> dataset_days, std::uint64_t seed);

}  // namespace tollcast::eval
