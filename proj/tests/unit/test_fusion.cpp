#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tollcast/core/config.hpp"
#include "tollcast/fusion/feature_table.hpp"
#include "tollcast/fusion/series.hpp"
#include "tollcast/fusion/travel_time.hpp"

using namespace tollcast;
using namespace tollcast::fusion;

namespace {

StudyConfig one_day_config(const char* day = "2019-07-02", int days = 1) {
  RouteSet routes{RouteSpec{"I66", Direction::EB, {{"a", 5.0}, {"b", 6.0}}},
                  {RouteSpec{"US50", Direction::EB, {{"c", 12.0}}},
                   RouteSpec{"GWPK", Direction::EB, {{"d", 14.0}}}}};
  return StudyConfig{TimeGrid::for_days(Date::parse(day), days), std::move(routes)};
}

/// Every series present everywhere; toll ramps up 25 cents per bin.
FusedSeries full_series(const StudyConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.grid.interval_count());
  FusedSeries s;
  s.toll_cents.resize(n);
  s.tt_toll.resize(n);
  s.tt_alt_best.resize(n);
  s.tt_diff.resize(n);
  s.volume.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.toll_cents[i] = 100.0 + 25.0 * static_cast<double>(i % 240);
    s.tt_toll[i] = 12.0 + 0.01 * static_cast<double>(i % 240);
    s.tt_alt_best[i] = 18.0;
    s.tt_diff[i] = 18.0 - *s.tt_toll[i];
    s.volume[i] = 150.0;
  }
  return s;
}

}  // namespace

TEST_CASE("space_mean_speed") {
  const std::vector<SegmentObservation> two{{2.0, 60.0}, {3.0, 30.0}};
  CHECK(space_mean_speed(two) == doctest::Approx(37.5).epsilon(1e-12));
  const std::vector<SegmentObservation> one{{7.3, 50.0}};
  CHECK(space_mean_speed(one) == doctest::Approx(50.0).epsilon(1e-12));
  const std::vector<SegmentObservation> equal{{1.0, 42.0}, {9.0, 42.0}, {0.3, 42.0}};
  CHECK(space_mean_speed(equal) == doctest::Approx(42.0).epsilon(1e-12));
  CHECK_THROWS(space_mean_speed(std::vector<SegmentObservation>{}));
  CHECK_THROWS(space_mean_speed(std::vector<SegmentObservation>{{1.0, 0.0}}));
}

TEST_CASE("space_mean_speed is invariant under segment splitting") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> len(0.1, 3.0), spd(5.0, 80.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SegmentObservation> segs(1 + trial % 9);
    for (auto& s : segs) s = {len(rng), spd(rng)};
    auto split = segs;
    const std::size_t k = static_cast<std::size_t>(trial) % segs.size();
    split[k].length_miles /= 2.0;
    split.insert(split.begin() + static_cast<long>(k), split[k]);
    CHECK(space_mean_speed(split) == doctest::Approx(space_mean_speed(segs)).epsilon(1e-12));
  }
}

TEST_CASE("route_travel_time") {
  const RouteSpec two{"r", Direction::EB, {{"a", 2.0}, {"b", 3.0}}};
  const std::vector<std::optional<double>> v{60.0, 30.0};
  CHECK(*route_travel_time(two, v) == doctest::Approx(8.0).epsilon(1e-12));
  const RouteSpec five{"r", Direction::EB, {{"a", 5.0}}};
  CHECK(*route_travel_time(five, std::vector<std::optional<double>>{50.0}) ==
        doctest::Approx(6.0).epsilon(1e-12));
  const RouteSpec eleven{"r", Direction::EB, {{"a", 11.0}}};
  CHECK(*route_travel_time(eleven, std::vector<std::optional<double>>{55.0}) ==
        doctest::Approx(12.0).epsilon(1e-12));
  const std::vector<std::optional<double>> gap{60.0, std::nullopt};
  CHECK_FALSE(route_travel_time(two, gap));
}

TEST_CASE("aggregate_minutes_to_interval") {
  CHECK(*aggregate_minutes_to_interval(std::vector<double>(6, 50.0)) == 50.0);
  CHECK(*aggregate_minutes_to_interval(std::vector<double>{40.0, 60.0}) == 50.0);
  CHECK_FALSE(aggregate_minutes_to_interval(std::vector<double>{}));
}

TEST_CASE("resample_volume") {
  const TimeGrid grid = TimeGrid::for_days(Date::parse("2019-07-02"), 1);
  const LocalDateTime t0 = grid.start();

  SUBCASE("constant 150 per period is 60 per bin") {
    std::map<LocalDateTime, double> periods;
    for (int p = 0; p < 96; ++p) periods[t0.plus_minutes(15 * p)] = 150.0;
    const auto s = resample_volume(periods, grid);
    for (const auto& v : s) REQUIRE(*v == doctest::Approx(60.0));
  }
  SUBCASE("lanes are summed before rating") {
    std::vector<ingest::VolumeFeedRecord> recs;
    for (int p = 0; p < 96; ++p) {
      recs.push_back({"V1", t0.plus_minutes(15 * p), "L1", 100});
      recs.push_back({"V1", t0.plus_minutes(15 * p), "L2", 50});
    }
    const auto s = resample_volume(lane_totals(recs, "V1"), grid);
    CHECK(*s[17] == doctest::Approx(60.0));
  }
  SUBCASE("straddling bin mixes two rates") {
    // 600 vph = 150 per 15 min, 1200 vph = 300 per 15 min; bin 00:12-00:18.
    std::map<LocalDateTime, double> periods{{t0, 150.0}, {t0.plus_minutes(15), 300.0}};
    const auto s = resample_volume(periods, grid);
    CHECK(*s[2] == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(*s[0] == doctest::Approx(60.0));
    CHECK(*s[3] == doctest::Approx(120.0));
    CHECK_FALSE(s[5]);  // 00:30 period absent
  }
  SUBCASE("a missing lane makes the period missing") {
    std::vector<ingest::VolumeFeedRecord> recs{{"V1", t0, "L1", 10}, {"V1", t0, "L2", 10},
                                               {"V1", t0.plus_minutes(15), "L1", 10}};
    const auto totals = lane_totals(recs, "V1");
    CHECK(totals.size() == 1);
  }
  SUBCASE("vehicles are conserved over whole half-hours") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> count(0, 400);
    std::map<LocalDateTime, double> periods;
    double in = 0.0;
    for (int p = 0; p < 96; ++p) {
      const double c = count(rng);
      periods[t0.plus_minutes(15 * p)] = c;
      in += c;
    }
    double out = 0.0;
    for (const auto& v : resample_volume(periods, grid)) out += *v;
    CHECK(std::abs(out - in) <= 1e-9 * in);
  }
}

TEST_CASE("travel_time_difference") {
  using V = std::vector<std::optional<double>>;
  CHECK(*travel_time_difference(10.0, V{18.0, 14.0}) == 4.0);
  CHECK(*travel_time_difference(14.0, V{14.0}) == 0.0);
  CHECK(*travel_time_difference(20.0, V{15.0, 25.0}) == -5.0);
  CHECK(*travel_time_difference(20.0, V{std::nullopt, 25.0}) == 5.0);
  CHECK_FALSE(travel_time_difference(20.0, V{std::nullopt, std::nullopt}));
}

TEST_CASE("impute_series") {
  const auto none = std::nullopt;
  CHECK(impute_series({5.0, none, 7.0}, 2) == Series{5.0, 5.0, 7.0});
  CHECK(impute_series({5.0, none, none, none, 7.0}, 2) == Series{5.0, none, none, none, 7.0});
  CHECK(impute_series({none, none, 3.0}, 2) == Series{none, none, 3.0});
  CHECK(impute_series({1.0, none, none}, 2) == Series{1.0, 1.0, 1.0});
  CHECK(impute_series({1.0, none}, 0) == Series{1.0, none});
}

TEST_CASE("feature table over a fully covered EB window") {
  const StudyConfig cfg = one_day_config();
  const FeatureTable table = build_feature_table(cfg, full_series(cfg));
  REQUIRE(table.size() == 35);
  CHECK(table.drops().target_off_window == 5);
  CHECK(table.rows().front().timestamp.str() == "2019-07-02T05:30");
  CHECK(table.rows().back().timestamp.str() == "2019-07-02T08:54");
  const auto& r = table.rows().front();
  CHECK(r.minute_of_day == 330);
  CHECK(r.day_of_week == 1);
  // toll at 05:30 is 100 + 25 * 55; targets step 25 cents per bin.
  CHECK(r.toll_now.in_cents() == 1475);
  CHECK(r.target(HorizonIndex{1}) == 1500.0);
  CHECK(r.target(HorizonIndex{5}) == 1600.0);
  CHECK(table.current_target(r) == 1475.0);
  CHECK(table.features(r).size() == 7);
}

TEST_CASE("toll target at t+6 is copied verbatim") {
  const StudyConfig cfg = one_day_config();
  FusedSeries s = full_series(cfg);
  const auto t = static_cast<std::size_t>(cfg.grid.interval_of(LocalDateTime::parse("2019-07-02T07:00")));
  s.toll_cents[t + 1] = 825.0;
  const auto table = build_feature_table(cfg, s);
  bool found = false;
  for (const auto& r : table.rows()) {
    if (r.interval == static_cast<IntervalIndex>(t)) {
      CHECK(r.target(HorizonIndex{1}) == 825.0);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("speed outage drops overlapping rows and reports counts") {
  StudyConfig cfg = one_day_config();
  FusedSeries s = full_series(cfg);
  const auto from = cfg.grid.interval_of(LocalDateTime::parse("2019-07-02T07:00"));
  for (IntervalIndex i = from; i < from + 10; ++i) {
    s.tt_toll[static_cast<std::size_t>(i)] = std::nullopt;
    s.tt_diff[static_cast<std::size_t>(i)] = std::nullopt;
    s.tt_alt_best[static_cast<std::size_t>(i)] = std::nullopt;
  }
  SUBCASE("toll target") {
    const auto table = build_feature_table(cfg, s);
    CHECK(table.size() == 25);
    CHECK(table.drops().missing_feature == 10);
  }
  SUBCASE("tt_diff target also loses rows whose targets fall in the gap") {
    cfg.target_kind = TargetKind::TravelTimeDifference;
    const auto table = build_feature_table(cfg, s);
    CHECK(table.drops().missing_feature == 10);
    CHECK(table.drops().missing_target == 5);
    CHECK(table.size() == 20);
  }
}

TEST_CASE("empty table reports causes") {
  const StudyConfig cfg = one_day_config("2019-07-06");  // Saturday: nothing tolled
  try {
    build_feature_table(cfg, full_series(cfg));
    FAIL("expected EmptyFeatureTable");
  } catch (const EmptyFeatureTable& e) {
    CHECK(e.drops().total() == 0);
  }
  const StudyConfig weekday = one_day_config();
  FusedSeries s = full_series(weekday);
  for (auto& v : s.volume) v = std::nullopt;
  try {
    build_feature_table(weekday, s);
    FAIL("expected EmptyFeatureTable");
  } catch (const EmptyFeatureTable& e) {
    CHECK(e.drops().missing_feature == 35);
    CHECK(e.drops().target_off_window == 5);
  }
}

TEST_CASE("rows never depend on non-target data after their interval") {
  const StudyConfig cfg = one_day_config();
  const FusedSeries base = full_series(cfg);
  const auto table = build_feature_table(cfg, base);
  std::mt19937_64 rng(5);
  for (const auto& row : table.rows()) {
    FusedSeries perturbed = base;
    const auto t = static_cast<std::size_t>(row.interval);
    for (std::size_t i = t + 1; i < perturbed.tt_toll.size(); ++i) {
      const double bump = static_cast<double>(rng() % 7) + 1.0;
      *perturbed.tt_toll[i] += bump;
      *perturbed.tt_alt_best[i] += bump;
      *perturbed.volume[i] += bump;
    }
    const auto again = build_feature_table(cfg, perturbed);
    bool matched = false;
    for (const auto& r : again.rows()) {
      if (r.interval != row.interval) continue;
      matched = true;
      CHECK(again.features(r) == table.features(row));
      CHECK(r.targets == row.targets);
    }
    CHECK(matched);
  }
}

TEST_CASE("feature table is deterministic and round-trips through CSV") {
  const StudyConfig cfg = one_day_config("2019-07-01", 5);
  FusedSeries s = full_series(cfg);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : s.tt_toll) *v += u(rng) / 3.0;
  for (std::size_t i = 0; i < s.tt_diff.size(); ++i) s.tt_diff[i] = *s.tt_alt_best[i] - *s.tt_toll[i];
  const auto a = build_feature_table(cfg, s);
  const auto b = build_feature_table(cfg, s);
  CHECK(a.schema_hash() == b.schema_hash());
  CHECK(a.rows() == b.rows());
  CHECK(a.size() == 5 * 35);

  std::stringstream csv, meta;
  write_feature_table(csv, meta, a);
  const auto back = read_feature_table(csv, meta);
  CHECK(back.rows() == a.rows());
  CHECK(back.schema_hash() == a.schema_hash());
  CHECK(back.config_digest() == a.config_digest());
  CHECK(back.drops() == a.drops());
}

TEST_CASE("schema hash separates target kinds and feature gating") {
  CHECK(schema_hash(TargetKind::TollPrice, true) != schema_hash(TargetKind::TravelTimeDifference, true));
  CHECK(schema_hash(TargetKind::TollPrice, true) != schema_hash(TargetKind::TollPrice, false));
  CHECK(schema_hash(TargetKind::TollPrice, true).size() == 64);
}

TEST_CASE("window_ends respects day boundaries and gaps") {
  const StudyConfig cfg = one_day_config("2019-07-01", 2);
  FusedSeries s = full_series(cfg);
  const auto gap = cfg.grid.interval_of(LocalDateTime::parse("2019-07-01T07:00"));
  s.volume[static_cast<std::size_t>(gap)] = std::nullopt;
  const auto table = build_feature_table(cfg, s);
  REQUIRE(table.size() == 69);
  // Day 1: runs of 15 and 19 rows; day 2: 35 rows. Window 10 -> 6 + 10 + 26.
  CHECK(window_ends(table, 10).size() == 42);
  CHECK(window_ends(table, 1).size() == 69);
}
