#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tollcast/fusion/feature_table.hpp"

namespace fixture {

using tollcast::Date;
using tollcast::Money;
using tollcast::TargetKind;
using tollcast::fusion::FeatureRow;
using tollcast::fusion::FeatureTable;

/// Target at horizon h given the row and h.
using TargetFn = std::function<double(const FeatureRow&, int)>;

/// `days` consecutive weekdays from `first`, 35 in-window rows each starting
/// at 05:30, with random features and targets from `target`.
inline FeatureTable random_table(int days, std::uint64_t seed, const TargetFn& target,
                                 TargetKind kind = TargetKind::TollPrice,
                                 Date first = Date::parse("2019-01-07")) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> toll(2, 60);
  std::uniform_real_distribution<double> tt(8.0, 20.0), alt(12.0, 30.0), vol(40.0, 120.0);
  std::vector<FeatureRow> rows;
  Date day = first;
  for (int d = 0; d < days; ++d) {
    while (day.weekday() >= 5) day = day + 1;
    const auto day_index = static_cast<std::int64_t>(day - first);
    for (int k = 0; k < 35; ++k) {
      FeatureRow r;
      r.interval = day_index * 240 + 55 + k;
      r.timestamp = tollcast::LocalDateTime(day, tollcast::ClockTime::hm(5, 30)).plus_minutes(6 * k);
      r.toll_now = Money::cents(25 * toll(rng));
      r.tt_toll = tt(rng);
      r.tt_alt_best = alt(rng);
      r.tt_diff = r.tt_alt_best - r.tt_toll;
      r.volume_now = vol(rng);
      r.minute_of_day = r.timestamp.minute_of_day();
      r.day_of_week = day.weekday();
      for (int h = 1; h <= 5; ++h) r.targets[static_cast<std::size_t>(h - 1)] = target(r, h);
      rows.push_back(r);
    }
    day = day + 1;
  }
  return FeatureTable(kind, true, "fixture", std::move(rows));
}

}  // namespace fixture
