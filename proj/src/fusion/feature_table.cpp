#include "tollcast/fusion/feature_table.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/core.h>

#include "tollcast/core/csv.hpp"
#include "tollcast/core/digest.hpp"
#include "tollcast/core/tolling.hpp"
#include "tollcast/fusion/travel_time.hpp"

namespace tollcast::fusion {

namespace {

constexpr int kTableFormatVersion = 1;

template <typename Records, typename Key>
void sort_if_needed(Records& records, Key key) {
  auto less = [&](const auto& a, const auto& b) { return key(a) < key(b); };
  if (!std::is_sorted(records.begin(), records.end(), less)) {
    std::stable_sort(records.begin(), records.end(), less);
  }
}

double parse_double(const std::string& text, std::size_t line, const char* column) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) {
    throw std::runtime_error(
        fmt::format("feature table line {}: bad {} '{}'", line, column, text));
  }
  return v;
}

std::int64_t parse_int(const std::string& text, std::size_t line, const char* column) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) {
    throw std::runtime_error(
        fmt::format("feature table line {}: bad {} '{}'", line, column, text));
  }
  return v;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
  return out;
}

}  // namespace

std::string DropCounts::str() const {
  return fmt::format("missing_feature={} missing_target={} target_off_window={} below_guard={}",
                     missing_feature, missing_target, target_off_window, below_guard);
}

double target_guard(TargetKind kind) {
  return kind == TargetKind::TollPrice ? 1.0 : 0.01;
}

std::vector<std::string> feature_names(bool calendar_features) {
  std::vector<std::string> names{"toll_cents", "tt_toll_min", "tt_alt_best_min", "tt_diff_min",
                                 "volume_veh"};
  if (calendar_features) {
    names.emplace_back("minute_of_day");
    names.emplace_back("day_of_week");
  }
  return names;
}

std::string schema_hash(TargetKind kind, bool calendar_features) {
  std::string desc = fmt::format("v{};step=6min;columns=", kTableFormatVersion);
  desc +=
      "interval[index],timestamp[local],toll_cents[cents],tt_toll_min[min],"
      "tt_alt_best_min[min],tt_diff_min[min],volume_veh[veh/6min],minute_of_day[min],"
      "day_of_week[0=Mon]";
  desc += fmt::format(";targets=h1..h5[{}]", kind == TargetKind::TollPrice ? "cents" : "min");
  desc += fmt::format(";target_kind={}", to_string(kind));
  desc += ";features=";
  for (const auto& n : feature_names(calendar_features)) desc += n + ",";
  return to_hex(sha256(desc));
}

std::string table_config_digest(const StudyConfig& c) {
  std::string d = fmt::format("grid={}+{};dir={};target={};pair={}>{};station={};calendar={};gap={};",
                              c.grid.start().str(), c.grid.interval_count(),
                              to_string(c.direction()), to_string(c.target_kind), c.toll_entry,
                              c.toll_exit, c.volume_station, c.calendar_features, c.impute_max_gap);
  for (const auto& w : c.windows) {
    d += fmt::format("win={}:{}-{}:{};", to_string(w.direction), w.daily_start.str(),
                     w.daily_end.str(), w.active_days.to_string());
  }
  auto route = [&](const RouteSpec& r) {
    d += "route=" + r.route_id() + ":";
    for (const auto& s : r.segments()) d += fmt::format("{}@{},", s.segment_id, s.length_miles);
    d += ";";
  };
  route(c.routes.toll);
  for (const auto& r : c.routes.alternatives) route(r);
  return to_hex(sha256(d));
}

std::string select_toll_pair(const StudyConfig& config,
                             const std::vector<ingest::TollFeedRecord>& tolls) {
  if (!config.toll_entry.empty() || !config.toll_exit.empty()) {
    return config.toll_entry + ">" + config.toll_exit;
  }
  std::map<std::string, std::int64_t> totals;
  for (const auto& r : tolls) totals[ingest::series_key(r)] += r.toll.in_cents();
  if (totals.empty()) throw std::runtime_error("toll feed has no records");
  auto best = totals.begin();
  for (auto it = totals.begin(); it != totals.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

FusedSeries fuse_feeds(const StudyConfig& config, std::vector<ingest::TollFeedRecord> tolls,
                       std::vector<ingest::SpeedFeedRecord> speeds,
                       std::vector<ingest::VolumeFeedRecord> volumes, FusionReport* report) {
  const TimeGrid& grid = config.grid;
  const auto n_bins = static_cast<std::size_t>(grid.interval_count());
  FusionReport local;
  FusionReport& rep = report ? *report : local;

  sort_if_needed(tolls, [](const auto& r) { return std::tie(r.timestamp, r.entry_ramp, r.exit_ramp); });
  sort_if_needed(speeds, [](const auto& r) { return std::tie(r.timestamp, r.segment_id); });
  sort_if_needed(volumes, [](const auto& r) { return std::tie(r.period_start, r.station_id, r.lane_id); });
  for (const auto& f : ingest::deduplicate(tolls)) rep.duplicate_records += f.occurrences - 1;
  for (const auto& f : ingest::deduplicate(speeds)) rep.duplicate_records += f.occurrences - 1;
  for (const auto& f : ingest::deduplicate(volumes)) rep.duplicate_records += f.occurrences - 1;

  FusedSeries out;

  // Toll.
  rep.toll_pair = select_toll_pair(config, tolls);
  out.toll_cents.assign(n_bins, std::nullopt);
  for (const auto& r : tolls) {
    if (ingest::series_key(r) != rep.toll_pair || !grid.contains(r.timestamp)) continue;
    out.toll_cents[static_cast<std::size_t>(grid.interval_of(r.timestamp))] =
        static_cast<double>(r.toll.in_cents());
  }

  // Segment speeds: minute records -> 6-minute means -> imputed series.
  std::vector<const RouteSpec*> routes{&config.routes.toll};
  for (const auto& r : config.routes.alternatives) routes.push_back(&r);
  std::unordered_map<std::string, std::size_t> seg_index;
  for (const auto* r : routes) {
    for (const auto& s : r->segments()) seg_index.emplace(s.segment_id, seg_index.size());
  }
  const std::size_t n_seg = seg_index.size();
  std::vector<double> sum(n_seg * n_bins, 0.0);
  std::vector<std::uint8_t> count(n_seg * n_bins, 0);
  // Minute order within a bin, same summation as aggregate_minutes_to_interval.
  for (const auto& r : speeds) {
    auto it = seg_index.find(r.segment_id);
    if (it == seg_index.end() || !grid.contains(r.timestamp)) continue;
    const std::size_t k = it->second * n_bins + static_cast<std::size_t>(grid.interval_of(r.timestamp));
    sum[k] += r.speed_mph;
    ++count[k];
  }
  std::vector<Series> seg_speed(n_seg);
  for (std::size_t s = 0; s < n_seg; ++s) {
    Series raw(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
      const std::size_t k = s * n_bins + b;
      if (count[k]) raw[b] = sum[k] / count[k];
    }
    Series filled = impute_series(raw, config.impute_max_gap);
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (!raw[b] && filled[b]) ++rep.speed_bins_imputed;
    }
    seg_speed[s] = std::move(filled);
  }

  auto route_series = [&](const RouteSpec& route) {
    Series tt(n_bins);
    std::vector<std::optional<double>> at(route.segments().size());
    for (std::size_t b = 0; b < n_bins; ++b) {
      for (std::size_t i = 0; i < at.size(); ++i) {
        at[i] = seg_speed[seg_index.at(route.segments()[i].segment_id)][b];
      }
      tt[b] = route_travel_time(route, at);
    }
    return tt;
  };
  out.tt_toll = route_series(config.routes.toll);
  std::vector<Series> alt_tt;
  for (const auto& r : config.routes.alternatives) alt_tt.push_back(route_series(r));
  out.tt_alt_best.assign(n_bins, std::nullopt);
  out.tt_diff.assign(n_bins, std::nullopt);
  std::vector<std::optional<double>> alts(alt_tt.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    for (std::size_t a = 0; a < alts.size(); ++a) alts[a] = alt_tt[a][b];
    if (!out.tt_toll[b]) continue;
    out.tt_diff[b] = travel_time_difference(*out.tt_toll[b], alts);
    if (out.tt_diff[b]) out.tt_alt_best[b] = *out.tt_diff[b] + *out.tt_toll[b];
  }

  // Volume.
  std::string station = config.volume_station;
  if (station.empty()) {
    std::set<std::string> stations;
    for (const auto& r : volumes) stations.insert(r.station_id);
    if (!stations.empty()) station = *stations.begin();
  }
  rep.volume_station = station;
  out.volume = impute_series(resample_volume(lane_totals(volumes, station), grid),
                             config.impute_max_gap);
  return out;
}

FeatureTable::FeatureTable(TargetKind kind, bool calendar_features, std::string config_digest,
                           std::vector<FeatureRow> rows, DropCounts drops)
    : kind_(kind),
      calendar_(calendar_features),
      schema_hash_(fusion::schema_hash(kind, calendar_features)),
      config_digest_(std::move(config_digest)),
      rows_(std::move(rows)),
      drops_(drops) {
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].interval <= rows_[i - 1].interval) {
      throw std::invalid_argument("feature table rows must be strictly increasing by interval");
    }
  }
}

std::vector<double> FeatureTable::features(const FeatureRow& row) const {
  std::vector<double> x{static_cast<double>(row.toll_now.in_cents()), row.tt_toll,
                        row.tt_alt_best, row.tt_diff, row.volume_now};
  if (calendar_) {
    x.push_back(static_cast<double>(row.minute_of_day));
    x.push_back(static_cast<double>(row.day_of_week));
  }
  return x;
}

double FeatureTable::current_target(const FeatureRow& row) const {
  return kind_ == TargetKind::TollPrice ? static_cast<double>(row.toll_now.in_cents())
                                        : row.tt_diff;
}

FeatureTable FeatureTable::subset(const std::vector<Date>& days) const {
  std::set<Date> keep(days.begin(), days.end());
  std::vector<FeatureRow> rows;
  for (const auto& r : rows_) {
    if (keep.count(r.timestamp.date())) rows.push_back(r);
  }
  return FeatureTable{kind_, calendar_, config_digest_, std::move(rows), drops_};
}

std::vector<Date> FeatureTable::days() const {
  std::vector<Date> out;
  for (const auto& r : rows_) {
    const Date d = r.timestamp.date();
    if (out.empty() || out.back() != d) out.push_back(d);
  }
  return out;
}

std::optional<FeatureRow> features_at(const StudyConfig& config, const FusedSeries& series,
                                      IntervalIndex t) {
  if (t < 0 || t >= config.grid.interval_count()) return std::nullopt;
  const auto at = static_cast<std::size_t>(t);
  if (!series.toll_cents[at] || !series.tt_toll[at] || !series.tt_alt_best[at] ||
      !series.tt_diff[at] || !series.volume[at]) {
    return std::nullopt;
  }
  const LocalDateTime ts = config.grid.timestamp_of(t);
  FeatureRow row;
  row.interval = t;
  row.timestamp = ts;
  row.toll_now = Money::cents(static_cast<std::int64_t>(std::llround(*series.toll_cents[at])));
  row.tt_toll = *series.tt_toll[at];
  row.tt_alt_best = *series.tt_alt_best[at];
  row.tt_diff = *series.tt_diff[at];
  row.volume_now = *series.volume[at];
  row.minute_of_day = ts.minute_of_day();
  row.day_of_week = ts.date().weekday();
  return row;
}

FeatureTable build_feature_table(const StudyConfig& config, const FusedSeries& series) {
  const TimeGrid& grid = config.grid;
  const auto n = grid.interval_count();
  const Direction dir = config.direction();
  const double guard = target_guard(config.target_kind);
  const Series& target_series =
      config.target_kind == TargetKind::TollPrice ? series.toll_cents : series.tt_diff;

  DropCounts drops;
  std::vector<FeatureRow> rows;
  for (IntervalIndex t : tolling_intervals(grid, config.windows, dir)) {
    const LocalDateTime ts = grid.timestamp_of(t);
    const auto at = static_cast<std::size_t>(t);

    bool off_window = false;
    for (int h = 1; h <= kHorizonCount && !off_window; ++h) {
      const IntervalIndex u = t + h;
      if (u >= n) {
        off_window = true;
        break;
      }
      const LocalDateTime tu = grid.timestamp_of(u);
      off_window = tu.date() != ts.date() || !is_tolling(tu, dir, config.windows) ||
                   in_dst_transition(tu);
    }
    if (off_window) {
      ++drops.target_off_window;
      continue;
    }
    auto current_row = features_at(config, series, t);
    if (!current_row) {
      ++drops.missing_feature;
      continue;
    }
    FeatureRow row = *current_row;
    bool missing = false;
    bool small = false;
    for (int h = 1; h <= kHorizonCount; ++h) {
      const auto& v = target_series[at + static_cast<std::size_t>(h)];
      if (!v) {
        missing = true;
        break;
      }
      if (std::abs(*v) < guard) small = true;
      row.targets[static_cast<std::size_t>(h - 1)] = *v;
    }
    if (missing) {
      ++drops.missing_target;
      continue;
    }
    const double current = config.target_kind == TargetKind::TollPrice ? *series.toll_cents[at]
                                                                       : *series.tt_diff[at];
    if (small || std::abs(current) < guard) {
      ++drops.below_guard;
      continue;
    }
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw EmptyFeatureTable("feature table is empty (" + drops.str() + ")", drops);
  }
  return FeatureTable{config.target_kind, config.calendar_features, table_config_digest(config),
                      std::move(rows), drops};
}

void write_feature_table(std::ostream& csv_out, std::ostream& meta, const FeatureTable& table) {
  csv_out << kFeatureTableHeader << '\n';
  for (const auto& r : table.rows()) {
    csv_out << fmt::format("{},{},{},{},{},{},{},{},{}", r.interval, r.timestamp.str(),
                           r.toll_now.in_cents(), r.tt_toll, r.tt_alt_best, r.tt_diff,
                           r.volume_now, r.minute_of_day, r.day_of_week);
    for (double t : r.targets) csv_out << fmt::format(",{}", t);
    csv_out << '\n';
  }
  const auto& d = table.drops();
  meta << fmt::format(
      "format_version = {}\nschema_hash = {}\ntarget_kind = {}\ncalendar_features = {}\n"
      "config_digest = {}\nrows = {}\ndropped.missing_feature = {}\n"
      "dropped.missing_target = {}\ndropped.target_off_window = {}\ndropped.below_guard = {}\n",
      kTableFormatVersion, table.schema_hash(), to_string(table.target_kind()),
      table.calendar_features(), table.config_digest(), table.size(), d.missing_feature,
      d.missing_target, d.target_off_window, d.below_guard);
}

FeatureTable read_feature_table(std::istream& csv_in, std::istream& meta_in) {
  const auto meta = KeyValueConfig::parse(meta_in);
  if (meta.get_int("format_version", -1) != kTableFormatVersion) {
    throw std::runtime_error(
        fmt::format("feature table metadata: expected format_version {}", kTableFormatVersion));
  }
  const TargetKind kind = parse_target_kind(meta.get_string("target_kind", ""));
  const bool calendar = meta.get_bool("calendar_features", true);
  const std::string stored_hash = meta.get_string("schema_hash", "");
  if (stored_hash != schema_hash(kind, calendar)) {
    throw std::runtime_error(fmt::format("feature table schema hash {} does not match {}",
                                         stored_hash, schema_hash(kind, calendar)));
  }
  DropCounts drops;
  drops.missing_feature = static_cast<std::size_t>(meta.get_int("dropped.missing_feature", 0));
  drops.missing_target = static_cast<std::size_t>(meta.get_int("dropped.missing_target", 0));
  drops.target_off_window = static_cast<std::size_t>(meta.get_int("dropped.target_off_window", 0));
  drops.below_guard = static_cast<std::size_t>(meta.get_int("dropped.below_guard", 0));

  csv::Reader reader(csv_in);
  auto header = reader.next();
  std::vector<std::string> expected;
  {
    std::stringstream ss(kFeatureTableHeader);
    std::string f;
    while (std::getline(ss, f, ',')) expected.push_back(f);
  }
  if (!header || header->fields != expected) {
    throw std::runtime_error("feature table: unexpected header");
  }
  std::vector<FeatureRow> rows;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != expected.size()) {
      throw std::runtime_error(fmt::format("feature table line {}: expected {} fields", row->line,
                                           expected.size()));
    }
    FeatureRow r;
    r.interval = parse_int(f[0], row->line, "interval");
    r.timestamp = LocalDateTime::parse(f[1]);
    r.toll_now = Money::cents(parse_int(f[2], row->line, "toll_cents"));
    r.tt_toll = parse_double(f[3], row->line, "tt_toll_min");
    r.tt_alt_best = parse_double(f[4], row->line, "tt_alt_best_min");
    r.tt_diff = parse_double(f[5], row->line, "tt_diff_min");
    r.volume_now = parse_double(f[6], row->line, "volume_veh");
    r.minute_of_day = static_cast<int>(parse_int(f[7], row->line, "minute_of_day"));
    r.day_of_week = static_cast<int>(parse_int(f[8], row->line, "day_of_week"));
    for (std::size_t h = 0; h < 5; ++h) r.targets[h] = parse_double(f[9 + h], row->line, "target");
    rows.push_back(r);
  }
  if (rows.size() != static_cast<std::size_t>(meta.get_int("rows", -1))) {
    throw std::runtime_error("feature table: row count differs from metadata");
  }
  return FeatureTable{kind, calendar, meta.get_string("config_digest", ""), std::move(rows), drops};
}

void write_fused_series(std::ostream& out, const TimeGrid& grid, const FusedSeries& series) {
  auto field = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
  };
  out << kFusedSeriesHeader << '\n';
  for (IntervalIndex t = 0; t < grid.interval_count(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (!series.toll_cents[i] && !series.tt_toll[i] && !series.tt_alt_best[i] &&
        !series.tt_diff[i] && !series.volume[i]) {
      continue;
    }
    out << fmt::format("{},{},{},{},{},{},{}\n", t, grid.timestamp_of(t).str(),
                       field(series.toll_cents[i]), field(series.tt_toll[i]),
                       field(series.tt_alt_best[i]), field(series.tt_diff[i]),
                       field(series.volume[i]));
  }
}

FusedSeries read_fused_series(std::istream& in, const TimeGrid& grid) {
  const auto n = static_cast<std::size_t>(grid.interval_count());
  FusedSeries s{Series(n), Series(n), Series(n), Series(n), Series(n)};
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || csv_join(header->fields) != kFusedSeriesHeader) {
    throw std::runtime_error("fused series: unexpected header");
  }
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 7) {
      throw std::runtime_error(fmt::format("fused series line {}: expected 7 fields", row->line));
    }
    const IntervalIndex t = parse_int(f[0], row->line, "interval");
    if (t < 0 || t >= grid.interval_count() || grid.timestamp_of(t).str() != f[1]) {
      throw std::runtime_error(
          fmt::format("fused series line {}: interval does not match the study grid", row->line));
    }
    const auto i = static_cast<std::size_t>(t);
    Series* cols[] = {&s.toll_cents, &s.tt_toll, &s.tt_alt_best, &s.tt_diff, &s.volume};
    for (std::size_t c = 0; c < 5; ++c) {
      if (!f[2 + c].empty()) (*cols[c])[i] = parse_double(f[2 + c], row->line, "value");
    }
  }
  return s;
}

std::vector<std::size_t> window_ends(const FeatureTable& table, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const auto& rows = table.rows();
  std::vector<std::size_t> ends;
  std::size_t run = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool continues = i > 0 && rows[i].interval == rows[i - 1].interval + 1 &&
                           rows[i].timestamp.date() == rows[i - 1].timestamp.date();
    run = continues ? run + 1 : 1;
    if (run >= static_cast<std::size_t>(window)) ends.push_back(i);
  }
  return ends;
}

}  // namespace tollcast::fusion
