#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tollcast/eval/metrics.hpp"
#include "tollcast/eval/split.hpp"
#include "tollcast/fusion/feature_table.hpp"
#include "tollcast/models/model.hpp"

namespace tollcast::eval {

struct MetricsEntry {
  models::Algorithm algorithm;
  HorizonIndex horizon;
  std::string split;  // "test" or "train"
  Metrics metrics;
};

struct DayMetricsEntry {
  models::Algorithm algorithm;
  HorizonIndex horizon;
  Date day;
  Metrics metrics;
};

struct BoxEntry {
  models::Algorithm algorithm;
  HorizonIndex horizon;
  BoxStats stats;
};

struct PredictionRecord {
  models::Algorithm algorithm;
  HorizonIndex horizon;
  LocalDateTime timestamp;
  double actual;
  double predicted;
};

struct SuiteOptions {
  /// Also score the train split.
  bool include_train = false;
};

struct SuiteResult {
  std::vector<MetricsEntry> metrics;
  std::vector<DayMetricsEntry> by_day;
  std::vector<BoxEntry> boxes;
  /// Test-split predictions behind the metrics.
  std::vector<PredictionRecord> predictions;

  /// Pooled test metrics for one (algorithm, horizon); throws if absent.
  const Metrics& test(models::Algorithm a, HorizonIndex h) const;
};

/// Scores every artifact on the test days of `split`. The persistence baseline
/// is added for each horizon that lacks one. Within a horizon all algorithms
/// are scored on the same rows: those where every model has a prediction.
/// Throws models::SchemaMismatch when an artifact does not fit the table.
SuiteResult evaluate_suite(const std::vector<models::ModelArtifact>& artifacts,
                           const fusion::FeatureTable& table, const SplitAssignment& split,
                           const SuiteOptions& options = {});

inline constexpr const char* kMetricsHeader = "algorithm,horizon_min,split,mae,mape,r2";
inline constexpr const char* kBoxStatsHeader =
    "algorithm,horizon_min,min,whisker_low,q1,median,q3,whisker_high,max,outliers";
inline constexpr const char* kMetricsByDayHeader = "algorithm,horizon_min,date,n,mae,mape,r2";
inline constexpr const char* kScatterHeader = "timestamp,toll_cents,tt_diff_min";
inline constexpr const char* kPredictionsHeader =
    "algorithm,horizon_min,timestamp,actual,predicted";

/// Writes metrics.csv, metrics_by_day.csv, errors_boxstats.csv,
/// predictions.csv, and scatter_toll_vs_ttdiff.csv (every table row), plus SVG
/// charts when `svg` is set. Returns the paths written.
std::vector<std::filesystem::path> write_suite_outputs(const SuiteResult& result,
                                                       const fusion::FeatureTable& table,
                                                       const std::filesystem::path& dir,
                                                       bool svg);

}  // namespace tollcast::eval
