#include <doctest.h>

#include <sstream>

#include "tollcast/core/tolling.hpp"
#include "tollcast/ingest/feeds.hpp"

using namespace tollcast;
using namespace tollcast::ingest;

TEST_CASE("well-formed toll file") {
  std::stringstream in(
      "timestamp,entry_ramp,exit_ramp,toll_cents\n"
      "2019-07-01T05:36,R01,R12,850\n"
      "2019-07-01T05:30,R01,R12,825\n"
      "2019-07-01T05:30,R03,R12,500\n");
  const auto feed = parse_toll_feed(in);
  CHECK(feed.records.size() == 3);
  CHECK(feed.report.rejected.empty());
  CHECK(feed.report.accepted == 3);
  CHECK(feed.report.total_rows == 3);
  // Ordered by timestamp then identifier.
  CHECK(feed.records[0].toll.in_cents() == 825);
  CHECK(feed.records[1].entry_ramp == "R03");
  CHECK(feed.records[2].timestamp.str() == "2019-07-01T05:36");
}

TEST_CASE("row-level rejections carry line numbers and reasons") {
  std::stringstream speed(
      "segment_id,timestamp,speed_mph\n"
      "s1,2019-07-01T05:30,55.5\n"
      "s1,2019-07-01T05:31,-5\n"
      "s1,2019-07-01T05:32,150\n"
      "s1,2019-07-01T05:33,fast\n"
      "s1,2019-07-01T05:34\n"
      ",2019-07-01T05:35,50\n");
  const auto feed = parse_speed_feed(speed);
  CHECK(feed.records.size() == 1);
  REQUIRE(feed.report.rejected.size() == 5);
  CHECK(feed.report.rejected[0] == Rejection{3, "nonpositive speed"});
  CHECK(feed.report.rejected[1].reason == "speed above sanity bound");
  CHECK(feed.report.rejected[2].line == 5);
  CHECK(feed.report.rejected[3].reason == "expected 3 fields, got 2");
  CHECK(feed.report.rejected[4].reason == "empty segment id");
  CHECK(feed.report.accepted + feed.report.rejected.size() == feed.report.total_rows);

  std::stringstream volume(
      "station_id,period_start,lane_id,count\n"
      "V1,2019-07-01T05:07,L1,40\n"
      "V1,2019-07-01T05:15,L1,-3\n"
      "V1,2019-07-01T05:30,L1,12\n");
  const auto vol = parse_volume_feed(volume);
  CHECK(vol.records.size() == 1);
  REQUIRE(vol.report.rejected.size() == 2);
  CHECK(vol.report.rejected[0].reason == "unaligned period");
  CHECK(vol.report.rejected[1].reason == "negative count");

  std::stringstream toll(
      "timestamp,entry_ramp,exit_ramp,toll_cents\n"
      "2019-07-01T05:31,R1,R2,100\n"
      "2019-07-01T05:30,R1,R2,5001\n"
      "2019-07-01T05:30,R1,R2,-1\n"
      "not-a-time,R1,R2,100\n");
  const auto tf = parse_toll_feed(toll);
  CHECK(tf.records.empty());
  REQUIRE(tf.report.rejected.size() == 4);
  CHECK(tf.report.rejected[0].reason == "unaligned timestamp");
  CHECK(tf.report.rejected[1].reason == "toll above sanity bound");
  CHECK(tf.report.rejected[2].reason == "negative toll");
  CHECK(tf.report.rejected[3].reason == "bad timestamp 'not-a-time'");
}

TEST_CASE("fatal format errors") {
  std::stringstream empty("");
  CHECK_THROWS_AS(parse_toll_feed(empty), FeedFormatError);
  std::stringstream wrong("ts,entry,exit,toll\n2019-07-01T05:30,R1,R2,100\n");
  CHECK_THROWS_AS(parse_toll_feed(wrong), FeedFormatError);
  std::stringstream speed_as_toll("segment_id,timestamp,speed_mph\n");
  CHECK_THROWS_AS(parse_toll_feed(speed_as_toll), FeedFormatError);
  std::stringstream header_only("segment_id,timestamp,speed_mph\n");
  CHECK(parse_speed_feed(header_only).records.empty());
}

TEST_CASE("quoted identifiers survive") {
  std::stringstream in(
      "timestamp,entry_ramp,exit_ramp,toll_cents\n"
      "2019-07-01T05:30,\"Glebe Rd, VA-120\",R12,825\n");
  const auto feed = parse_toll_feed(in);
  REQUIRE(feed.records.size() == 1);
  CHECK(feed.records[0].entry_ramp == "Glebe Rd, VA-120");
  std::stringstream out;
  write_toll_feed(out, feed.records);
  std::stringstream again(out.str());
  CHECK(parse_toll_feed(again).records == feed.records);
}

TEST_CASE("parse is deterministic and round-trips") {
  std::string text = "segment_id,timestamp,speed_mph\n";
  for (int m = 0; m < 60; ++m) {
    text += "s" + std::to_string(m % 3) + ",2019-07-01T06:" + (m < 10 ? "0" : "") +
            std::to_string(m) + "," + std::to_string(30.0 + m * 0.37) + "\n";
  }
  text += "s9,2019-07-01T06:00,0\n";
  std::stringstream a(text), b(text);
  const auto first = parse_speed_feed(a);
  const auto second = parse_speed_feed(b);
  CHECK(first.records == second.records);
  CHECK(first.report == second.report);

  std::stringstream out;
  write_speed_feed(out, first.records);
  std::stringstream back(out.str());
  CHECK(parse_speed_feed(back).records == first.records);
}

TEST_CASE("coverage") {
  const TimeGrid grid = TimeGrid::for_days(Date::parse("2019-07-01"), 10);
  const auto bins = tolling_intervals(grid, {{TollingWindow{Direction::EB, ClockTime::hm(6, 0),
                                                            ClockTime::hm(7, 0), kAllDays}}},
                                      Direction::EB);
  REQUIRE(bins.size() == 100);

  std::vector<SpeedFeedRecord> full;
  for (auto b : bins) {
    for (int m = 0; m < 6; ++m) full.push_back({"s1", grid.timestamp_of(b).plus_minutes(m), 50.0});
  }
  SUBCASE("full feed") {
    const auto rep = coverage(full, grid, {"s1"}, bins);
    CHECK(rep.coverage.at("s1") == doctest::Approx(1.0));
    CHECK(rep.duplicates.empty());
  }
  SUBCASE("one missing day out of ten") {
    std::vector<SpeedFeedRecord> partial;
    for (const auto& r : full) {
      if (r.timestamp.date() != Date::parse("2019-07-04")) partial.push_back(r);
    }
    CHECK(coverage(partial, grid, {"s1"}, bins).coverage.at("s1") == doctest::Approx(0.9));
  }
  SUBCASE("absent key has zero coverage") {
    CHECK(coverage(full, grid, {"s1", "s2"}, bins).coverage.at("s2") == 0.0);
  }
  SUBCASE("duplicates flagged and last kept") {
    std::vector<SpeedFeedRecord> dup{{"s1", LocalDateTime::parse("2019-07-01T06:00"), 40.0},
                                     {"s1", LocalDateTime::parse("2019-07-01T06:00"), 45.0},
                                     {"s1", LocalDateTime::parse("2019-07-01T06:01"), 50.0}};
    const auto rep = coverage(dup, grid, {"s1"}, bins);
    REQUIRE(rep.duplicates.size() == 1);
    CHECK(rep.duplicates[0].occurrences == 2);
    CHECK(rep.duplicates[0].key == "s1");
    auto kept = dup;
    CHECK(deduplicate(kept).size() == 1);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].speed_mph == 45.0);
  }
  SUBCASE("a 15-minute volume period covers the bins it overlaps") {
    std::vector<VolumeFeedRecord> vol{
        {"V1", LocalDateTime::parse("2019-07-01T06:00"), "L1", 100}};
    const auto rep = coverage(vol, grid, {"V1/L1"}, bins);
    CHECK(rep.coverage.at("V1/L1") == doctest::Approx(3.0 / 100.0));
  }
}
