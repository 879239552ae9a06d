#include "tollcast/ingest/feeds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/core.h>

#include "tollcast/core/csv.hpp"

namespace tollcast::ingest {

namespace {

/// Row-level failure; caught per row and turned into a Rejection.
struct RowError {
  std::string reason;
};

template <typename T>
T number(const std::string& text, const char* what) {
  T value{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) {
    throw RowError{fmt::format("bad {} '{}'", what, text)};
  }
  return value;
}

LocalDateTime timestamp(const std::string& text) {
  try {
    return LocalDateTime::parse(text);
  } catch (const std::exception&) {
    throw RowError{fmt::format("bad timestamp '{}'", text)};
  }
}

void require_id(const std::string& text, const char* what) {
  if (text.empty()) throw RowError{fmt::format("empty {}", what)};
}

std::vector<std::string> split_header(const char* header) {
  std::vector<std::string> out;
  std::stringstream ss(header);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

struct TollTraits {
  using Record = TollFeedRecord;
  static constexpr const char* header = kTollHeader;
  static constexpr int span_minutes = kStepMinutes;

  static Record parse(const std::vector<std::string>& f) {
    Record r;
    r.timestamp = timestamp(f[0]);
    require_id(f[1], "entry ramp");
    require_id(f[2], "exit ramp");
    r.entry_ramp = f[1];
    r.exit_ramp = f[2];
    const auto cents = number<std::int64_t>(f[3], "toll_cents");
    if (cents < 0) throw RowError{"negative toll"};
    if (cents > kMaxTollCents) throw RowError{"toll above sanity bound"};
    if (r.timestamp.minute_of_day() % kStepMinutes != 0) throw RowError{"unaligned timestamp"};
    r.toll = Money::cents(cents);
    return r;
  }
  static auto order(const Record& r) { return std::tie(r.timestamp, r.entry_ramp, r.exit_ramp); }
  static LocalDateTime when(const Record& r) { return r.timestamp; }
  static std::vector<std::string> fields(const Record& r) {
    return {r.timestamp.str(), r.entry_ramp, r.exit_ramp, std::to_string(r.toll.in_cents())};
  }
};

struct SpeedTraits {
  using Record = SpeedFeedRecord;
  static constexpr const char* header = kSpeedHeader;
  static constexpr int span_minutes = 1;

  static Record parse(const std::vector<std::string>& f) {
    Record r;
    require_id(f[0], "segment id");
    r.segment_id = f[0];
    r.timestamp = timestamp(f[1]);
    r.speed_mph = number<double>(f[2], "speed_mph");
    if (!std::isfinite(r.speed_mph)) throw RowError{"nonfinite speed"};
    if (r.speed_mph <= 0.0) throw RowError{"nonpositive speed"};
    if (r.speed_mph > kMaxSpeedMph) throw RowError{"speed above sanity bound"};
    return r;
  }
  static auto order(const Record& r) { return std::tie(r.timestamp, r.segment_id); }
  static LocalDateTime when(const Record& r) { return r.timestamp; }
  static std::vector<std::string> fields(const Record& r) {
    return {r.segment_id, r.timestamp.str(), fmt::format("{}", r.speed_mph)};
  }
};

struct VolumeTraits {
  using Record = VolumeFeedRecord;
  static constexpr const char* header = kVolumeHeader;
  static constexpr int span_minutes = kVolumePeriodMinutes;

  static Record parse(const std::vector<std::string>& f) {
    Record r;
    require_id(f[0], "station id");
    r.station_id = f[0];
    r.period_start = timestamp(f[1]);
    require_id(f[2], "lane id");
    r.lane_id = f[2];
    r.count = number<std::int64_t>(f[3], "count");
    if (r.count < 0) throw RowError{"negative count"};
    if (r.period_start.minute_of_day() % kVolumePeriodMinutes != 0) {
      throw RowError{"unaligned period"};
    }
    return r;
  }
  static auto order(const Record& r) {
    return std::tie(r.period_start, r.station_id, r.lane_id);
  }
  static LocalDateTime when(const Record& r) { return r.period_start; }
  static std::vector<std::string> fields(const Record& r) {
    return {r.station_id, r.period_start.str(), r.lane_id, std::to_string(r.count)};
  }
};

template <typename Traits>
ParsedFeed<typename Traits::Record> parse(std::istream& in) {
  csv::Reader reader(in);
  std::optional<csv::Row> header;
  try {
    header = reader.next();
  } catch (const std::runtime_error& e) {
    throw FeedFormatError(e.what());
  }
  if (!header) throw FeedFormatError("empty feed file");
  auto& hf = header->fields;
  if (!hf.empty() && hf[0].rfind("\xEF\xBB\xBF", 0) == 0) hf[0].erase(0, 3);  // UTF-8 BOM
  const auto expected = split_header(Traits::header);
  if (hf != expected) {
    throw FeedFormatError(fmt::format("bad header: expected '{}'", Traits::header));
  }

  ParsedFeed<typename Traits::Record> out;
  for (;;) {
    std::optional<csv::Row> row;
    try {
      row = reader.next();
    } catch (const std::runtime_error& e) {
      throw FeedFormatError(e.what());
    }
    if (!row) break;
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    ++out.report.total_rows;
    if (row->fields.size() != expected.size()) {
      out.report.rejected.push_back(
          {row->line, fmt::format("expected {} fields, got {}", expected.size(),
                                  row->fields.size())});
      continue;
    }
    try {
      out.records.push_back(Traits::parse(row->fields));
    } catch (const RowError& e) {
      out.report.rejected.push_back({row->line, e.reason});
    }
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const auto& a, const auto& b) { return Traits::order(a) < Traits::order(b); });
  out.report.accepted = out.records.size();
  return out;
}

template <typename Traits>
void write(std::ostream& out, const std::vector<typename Traits::Record>& records) {
  out << Traits::header << '\n';
  for (const auto& r : records) csv::write_row(out, Traits::fields(r));
}

template <typename Traits>
std::vector<DuplicateFlag> find_duplicates(const std::vector<typename Traits::Record>& records) {
  std::vector<DuplicateFlag> flags;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i + 1;
    while (j < records.size() && Traits::order(records[j]) == Traits::order(records[i])) ++j;
    if (j - i > 1) flags.push_back({series_key(records[i]), Traits::when(records[i]), j - i});
    i = j;
  }
  return flags;
}

template <typename Traits>
FeedReport cover(const std::vector<typename Traits::Record>& records, const TimeGrid& grid,
                 const std::vector<std::string>& expected_keys,
                 const std::vector<IntervalIndex>& expected_bins) {
  std::map<std::string, std::vector<char>> hit;
  for (const auto& k : expected_keys) hit[k].assign(grid.interval_count(), 0);

  const auto grid_start = grid.start();
  for (const auto& r : records) {
    auto it = hit.find(series_key(r));
    if (it == hit.end()) continue;
    const std::int64_t from = Traits::when(r) - grid_start;
    const std::int64_t to = from + Traits::span_minutes;  // exclusive
    if (to <= 0 || from >= grid.interval_count() * kStepMinutes) continue;
    const std::int64_t first = std::max<std::int64_t>(0, from) / kStepMinutes;
    const std::int64_t last = std::min<std::int64_t>(to - 1, grid.interval_count() * kStepMinutes - 1) / kStepMinutes;
    for (std::int64_t b = first; b <= last; ++b) it->second[b] = 1;
  }

  std::vector<IntervalIndex> bins = expected_bins;
  if (bins.empty()) {
    for (IntervalIndex i = 0; i < grid.interval_count(); ++i) {
      if (!grid.dropped(i)) bins.push_back(i);
    }
  }

  FeedReport report;
  report.total_rows = records.size();
  report.accepted = records.size();
  for (const auto& [key, marks] : hit) {
    std::size_t n = 0;
    for (auto b : bins) n += marks.at(static_cast<std::size_t>(b)) ? 1 : 0;
    report.coverage[key] = bins.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(bins.size());
  }
  report.duplicates = find_duplicates<Traits>(records);
  return report;
}

template <typename Traits>
std::vector<DuplicateFlag> dedupe(std::vector<typename Traits::Record>& records) {
  auto flags = find_duplicates<Traits>(records);
  if (flags.empty()) return flags;
  std::vector<typename Traits::Record> kept;
  kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i + 1 < records.size() && Traits::order(records[i + 1]) == Traits::order(records[i])) {
      continue;
    }
    kept.push_back(std::move(records[i]));
  }
  records = std::move(kept);
  return flags;
}

}  // namespace

ParsedFeed<TollFeedRecord> parse_toll_feed(std::istream& in) { return parse<TollTraits>(in); }
ParsedFeed<SpeedFeedRecord> parse_speed_feed(std::istream& in) { return parse<SpeedTraits>(in); }
ParsedFeed<VolumeFeedRecord> parse_volume_feed(std::istream& in) {
  return parse<VolumeTraits>(in);
}

void write_toll_feed(std::ostream& out, const std::vector<TollFeedRecord>& records) {
  write<TollTraits>(out, records);
}
void write_speed_feed(std::ostream& out, const std::vector<SpeedFeedRecord>& records) {
  write<SpeedTraits>(out, records);
}
void write_volume_feed(std::ostream& out, const std::vector<VolumeFeedRecord>& records) {
  write<VolumeTraits>(out, records);
}

std::string series_key(const TollFeedRecord& r) { return r.entry_ramp + ">" + r.exit_ramp; }
std::string series_key(const SpeedFeedRecord& r) { return r.segment_id; }
std::string series_key(const VolumeFeedRecord& r) { return r.station_id + "/" + r.lane_id; }

FeedReport coverage(const std::vector<TollFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins) {
  return cover<TollTraits>(records, grid, expected_keys, expected_bins);
}
FeedReport coverage(const std::vector<SpeedFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins) {
  return cover<SpeedTraits>(records, grid, expected_keys, expected_bins);
}
FeedReport coverage(const std::vector<VolumeFeedRecord>& records, const TimeGrid& grid,
                    const std::vector<std::string>& expected_keys,
                    const std::vector<IntervalIndex>& expected_bins) {
  return cover<VolumeTraits>(records, grid, expected_keys, expected_bins);
}

std::vector<DuplicateFlag> deduplicate(std::vector<TollFeedRecord>& records) {
  return dedupe<TollTraits>(records);
}
std::vector<DuplicateFlag> deduplicate(std::vector<SpeedFeedRecord>& records) {
  return dedupe<SpeedTraits>(records);
}
std::vector<DuplicateFlag> deduplicate(std::vector<VolumeFeedRecord>& records) {
  return dedupe<VolumeTraits>(records);
}

}  // namespace tollcast::ingest
