#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tollcast/core/config.hpp"
#include "tollcast/core/money.hpp"
#include "tollcast/fusion/series.hpp"
#include "tollcast/ingest/feeds.hpp"

namespace tollcast::fusion {

/// Grid-aligned inputs of the feature table, all the same length as the grid.
struct FusedSeries {
  Series toll_cents;
  Series tt_toll;
  Series tt_alt_best;
  Series tt_diff;
  Series volume;
};

/// What fusion chose and what it saw along the way.
struct FusionReport {
  std::string toll_pair;  // "entry>exit"
  std::string volume_station;
  std::size_t duplicate_records = 0;
  std::size_t speed_bins_imputed = 0;
};

/// Converts deduplicated-or-not raw feeds to grid series. Duplicates keep the
/// last occurrence. Segment speeds and volume are imputed with
/// config.impute_max_gap; tolls are never imputed.
FusedSeries fuse_feeds(const StudyConfig& config, std::vector<ingest::TollFeedRecord> tolls,
                       std::vector<ingest::SpeedFeedRecord> speeds,
                       std::vector<ingest::VolumeFeedRecord> volumes,
                       FusionReport* report = nullptr);

/// Chooses the prediction-target ramp pair: the configured one, else the pair
/// with the largest summed toll (the end-to-end trip on a distance-priced
/// corridor), ties broken lexicographically.
std::string select_toll_pair(const StudyConfig& config,
                             const std::vector<ingest::TollFeedRecord>& tolls);

struct FeatureRow {
  IntervalIndex interval = 0;
  LocalDateTime timestamp;
  Money toll_now;
  double tt_toll = 0.0;
  double tt_alt_best = 0.0;
  double tt_diff = 0.0;
  double volume_now = 0.0;
  int minute_of_day = 0;
  int day_of_week = 0;
  /// Value at t + 6h minutes for h = 1..5: cents or minutes per target kind.
  std::array<double, 5> targets{};

  double target(HorizonIndex h) const { return targets[static_cast<std::size_t>(h.value() - 1)]; }
  bool operator==(const FeatureRow&) const = default;
};

struct DropCounts {
  std::size_t missing_feature = 0;
  std::size_t missing_target = 0;
  std::size_t target_off_window = 0;
  std::size_t below_guard = 0;

  std::size_t total() const {
    return missing_feature + missing_target + target_off_window + below_guard;
  }
  std::string str() const;
  bool operator==(const DropCounts&) const = default;
};

class EmptyFeatureTable : public std::runtime_error {
 public:
  EmptyFeatureTable(const std::string& what, DropCounts drops)
      : std::runtime_error(what), drops_(drops) {}
  const DropCounts& drops() const { return drops_; }

 private:
  DropCounts drops_;
};

/// Smallest |target| kept: one cent for tolls, 0.01 minute for tt_diff.
double target_guard(TargetKind kind);

/// Model input columns, in order.
std::vector<std::string> feature_names(bool calendar_features);

class FeatureTable {
 public:
  FeatureTable(TargetKind kind, bool calendar_features, std::string config_digest,
               std::vector<FeatureRow> rows, DropCounts drops = {});

  TargetKind target_kind() const { return kind_; }
  bool calendar_features() const { return calendar_; }
  const std::string& schema_hash() const { return schema_hash_; }
  const std::string& config_digest() const { return config_digest_; }
  const std::vector<FeatureRow>& rows() const { return rows_; }
  const DropCounts& drops() const { return drops_; }
  std::size_t size() const { return rows_.size(); }

  std::vector<std::string> feature_names() const { return fusion::feature_names(calendar_); }
  std::size_t feature_count() const { return feature_names().size(); }
  std::vector<double> features(const FeatureRow& row) const;
  /// The row's current value of the target quantity (toll_now or tt_diff).
  double current_target(const FeatureRow& row) const;

  /// Rows whose interval lies on one of `days`, in table order.
  FeatureTable subset(const std::vector<Date>& days) const;
  std::vector<Date> days() const;

 private:
  TargetKind kind_;
  bool calendar_;
  std::string schema_hash_;
  std::string config_digest_;
  std::vector<FeatureRow> rows_;
  DropCounts drops_;
};

/// Hash over column names, units, order, target kind, and calendar gating.
std::string schema_hash(TargetKind kind, bool calendar_features);

/// Digest of the StudyConfig fields that shape the table.
std::string table_config_digest(const StudyConfig& config);

/// Feature columns of bin t with zero targets, or nullopt when any input is
/// missing. Does not check the tolling window.
std::optional<FeatureRow> features_at(const StudyConfig& config, const FusedSeries& series,
                                      IntervalIndex t);

/// Fused series as CSV, one line per grid bin, empty fields for missing values.
inline constexpr const char* kFusedSeriesHeader =
    "interval,timestamp,toll_cents,tt_toll_min,tt_alt_best_min,tt_diff_min,volume_veh";
void write_fused_series(std::ostream& csv, const TimeGrid& grid, const FusedSeries& series);
/// Throws std::runtime_error on a malformed file or a grid mismatch.
FusedSeries read_fused_series(std::istream& csv, const TimeGrid& grid);

/// One row per study-direction tolling interval whose current features and
/// all five in-window targets are present. Throws EmptyFeatureTable with
/// per-cause counts when nothing survives.
FeatureTable build_feature_table(const StudyConfig& config, const FusedSeries& series);

inline constexpr const char* kFeatureTableHeader =
    "interval,timestamp,toll_cents,tt_toll_min,tt_alt_best_min,tt_diff_min,volume_veh,"
    "minute_of_day,day_of_week,target_h1,target_h2,target_h3,target_h4,target_h5";

void write_feature_table(std::ostream& csv, std::ostream& meta, const FeatureTable& table);
FeatureTable read_feature_table(std::istream& csv, std::istream& meta);

/// Indices of rows that close a run of `window` consecutive same-day
/// intervals; the run starts at index end - window + 1.
std::vector<std::size_t> window_ends(const FeatureTable& table, int window);

}  // namespace tollcast::fusion
