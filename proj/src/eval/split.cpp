#include "tollcast/eval/split.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "tollcast/core/seed.hpp"

namespace tollcast::eval {

SplitAssignment make_split(std::vector<Date> days, std::uint64_t seed) {
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  if (days.empty()) throw std::invalid_argument("cannot split an empty dataset");
  const Date first = days.front(), last = days.back();
  const int months = last.month_key() - first.month_key() + 1;
  if (months < 2) {
    throw std::invalid_argument(
        fmt::format("split needs a span of at least 2 months, got {}..{}", first.str(), last.str()));
  }

  SplitAssignment s;
  s.seed = seed;
  const Date validation_start = last + (1 - kValidationDays);
  std::map<int, std::vector<Date>> eligible;  // by month_key
  for (int m = 0; m < months; ++m) eligible[first.month_key() + m];
  for (const Date d : days) {
    if (d >= validation_start) {
      s.validation_days.push_back(d);
    } else {
      eligible[d.month_key()].push_back(d);
    }
  }

  std::mt19937_64 rng(derive_seed(seed, "split"));
  std::set<Date> test;
  for (auto& [month, pool] : eligible) {
    if (pool.size() < static_cast<std::size_t>(kTestDaysPerMonth)) {
      throw std::invalid_argument(fmt::format(
          "month {:04}-{:02} has {} eligible test days outside validation, need {}", month / 12,
          month % 12 + 1, pool.size(),
          kTestDaysPerMonth));
    }
    for (int k = 0; k < kTestDaysPerMonth; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const auto i = pick(rng);
      test.insert(pool[i]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  s.test_days.assign(test.begin(), test.end());
  for (const Date d : days) {
    if (d < validation_start && !test.count(d)) s.train_days.push_back(d);
  }
  return s;
}

}  // namespace tollcast::eval
