#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tollcast/core/datetime.hpp"
#include "tollcast/core/money.hpp"
#include "tollcast/core/time_grid.hpp"

namespace tollcast::ingest {

enum class FeedKind { Toll, Speed, Volume };

/// Feed-level failure (bad header, empty file). Row-level problems never throw.
class FeedFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kMaxTollCents = 5000;
inline constexpr double kMaxSpeedMph = 120.0;
inline constexpr int kVolumePeriodMinutes = 15;

struct TollFeedRecord {
  LocalDateTime timestamp;
  std::string entry_ramp;
  std::string exit_ramp;
  Money toll;

  bool operator==(const TollFeedRecord&) const = default;
};

struct SpeedFeedRecord {
  std::string segment_id;
  LocalDateTime timestamp;
  double speed_mph = 0.0;

  bool operator==(const SpeedFeedRecord&) const = default;
};

struct VolumeFeedRecord {
  std::string station_id;
  LocalDateTime period_start;
  std::string lane_id;
  std::int64_t count = 0;

  bool operator==(const VolumeFeedRecord&) const = default;
};

struct Rejection {
  std::size_t line = 0;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

/// Several records share one (series key, timestamp); the last one in file
/// order is kept by `deduplicate`.
struct DuplicateFlag {
  std::string key;
  LocalDateTime timestamp;
  std::size_t occurrences = 0;

  bool operator==(const DuplicateFlag&) const = default;
};

struct FeedReport {
  std::size_t total_rows = 0;
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;
  /// Per series key, fraction of expected bins holding at least one record.
  std::map<std::string, double> coverage;
  std::vector<DuplicateFlag> duplicates;

  bool operator==(const FeedReport&) const = default;
};

template <typename Record>
struct ParsedFeed {
  std::vector<Record> records;
  FeedReport report;
};

/// CSV headers, exact.
inline constexpr const char* kTollHeader = "timestamp,entry_ramp,exit_ramp,toll_cents";
inline constexpr const char* kSpeedHeader = "segment_id,timestamp,speed_mph";
inline constexpr const char* kVolumeHeader = "station_id,period_start,lane_id,count";

/// Parse a feed file. Records come back ordered by timestamp then identifier,
/// with file order preserved among equal keys. Throws FeedFormatError on an
/// empty stream or a wrong header.
ParsedFeed<TollFeedRecord> parse_toll_feed(std::istream& in);
ParsedFeed<SpeedFeedRecord> parse_speed_feed(std::istream& in);
ParsedFeed<VolumeFeedRecord> parse_volume_feed(std::istream& in);

void write_toll_feed(std::ostream& out, const std::vector<TollFeedRecord>& records);
void write_speed_feed(std::ostream& out, const std::vector<SpeedFeedRecord>& records);
void write_volume_feed(std::ostream& out, const std::vector<VolumeFeedRecord>& records);

/// Series key used for coverage and duplicate detection.
std::string series_key(const TollFeedRecord& r);    // "entry>exit"
std::string series_key(const SpeedFeedRecord& r);   // segment id
std::string series_key(const VolumeFeedRecord& r);  // "station/lane"

/// Per-key coverage over `expected_bins` (all non-DST-dropped grid bins when
/// empty): a bin counts when any record's time span overlaps it. Duplicate
/// (key, timestamp) pairs are flagged. `accepted` is set to records.size().
FeedReport coverage(const std::vector<TollFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins = {});
FeedReport coverage(const std::vector<SpeedFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins = {});
FeedReport coverage(const std::vector<VolumeFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins = {});

/// Drops all but the last occurrence of each (key, timestamp) in sorted
/// parse output; returns what was flagged.
std::vector<DuplicateFlag> deduplicate(std::vector<TollFeedRecord>& records);
std::vector<DuplicateFlag> deduplicate(std::vector<SpeedFeedRecord>& records);
std::vector<DuplicateFlag> deduplicate(std::vector<VolumeFeedRecord>& records);

}  // namespace tollcast::ingest
