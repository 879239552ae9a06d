#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tollcast/core/config.hpp"
#include "tollcast/eval/suite.hpp"
#include "tollcast/fusion/feature_table.hpp"
#include "tollcast/ingest/feeds.hpp"
#include "tollcast/models/model.hpp"

namespace tollcast::cli {

/// File layout under the --out directory.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path raw() const { return root / "raw"; }
  std::filesystem::path toll_feed() const { return raw() / "toll.csv"; }
  std::filesystem::path speed_feed() const { return raw() / "speed.csv"; }
  std::filesystem::path volume_feed() const { return raw() / "volume.csv"; }
  std::filesystem::path routes() const { return raw() / "routes.csv"; }
  std::filesystem::path features() const { return root / "features"; }
  std::filesystem::path fused_series() const { return features() / "fused.csv"; }
  std::filesystem::path table_csv(TargetKind k) const;
  std::filesystem::path table_meta(TargetKind k) const;
  std::filesystem::path split_file(TargetKind k) const;
  std::filesystem::path models(TargetKind k) const;
  std::filesystem::path model_file(TargetKind k, models::Algorithm a, HorizonIndex h) const;
  std::filesystem::path eval(TargetKind k) const;
  std::filesystem::path manifests() const { return root / "manifests"; }
};

/// "toll" or "ttdiff".
std::string target_slug(TargetKind k);

/// Study config from the key file plus the workspace's routes.csv.
StudyConfig load_study(const KeyValueConfig& kv, const Workspace& ws);

struct FeedCheck {
  ingest::FeedReport toll;
  ingest::FeedReport speed;
  ingest::FeedReport volume;

  /// Smallest per-key coverage across the three feeds.
  double min_coverage() const;
};

/// Parses the three feeds and measures coverage over the study direction's
/// tolling bins.
FeedCheck validate_feeds(const KeyValueConfig& kv, const Workspace& ws);

struct FuseOutcome {
  fusion::FusionReport report;
  std::map<TargetKind, fusion::DropCounts> drops;
  std::map<TargetKind, std::size_t> rows;
  std::vector<std::filesystem::path> written;
};

/// Fuses the raw feeds and writes fused.csv plus one feature table per
/// target kind.
FuseOutcome fuse(const KeyValueConfig& kv, const Workspace& ws);

fusion::FeatureTable load_table(const Workspace& ws, TargetKind k);

/// Per-model sub-seed: derive_seed(seed, "model:<algo>", h).
std::uint64_t model_seed(std::uint64_t seed, models::Algorithm a, HorizonIndex h);

struct TrainedModel {
  std::filesystem::path path;
  models::ModelArtifact artifact;
  double seconds = 0.0;
};

/// Trains the requested models on the train days of the seeded split, with the
/// validation days for early stopping. Throws SchemaMismatch when the table on
/// disk does not carry the schema the config asks for.
std::vector<TrainedModel> train(const KeyValueConfig& kv, const Workspace& ws, TargetKind k,
                                const std::vector<models::Algorithm>& algos,
                                const std::vector<HorizonIndex>& horizons);

struct EvaluateOutcome {
  eval::SuiteResult result;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> written;
};

/// Scores every saved model of target `k` on the test days.
EvaluateOutcome evaluate(const KeyValueConfig& kv, const Workspace& ws, TargetKind k, bool svg);

struct HorizonForecast {
  HorizonIndex horizon;
  LocalDateTime at;
  std::optional<double> model;
  double persistence = 0.0;
};

struct Forecast {
  LocalDateTime issued;
  models::Algorithm algorithm;
  std::vector<HorizonForecast> horizons;
  std::vector<std::filesystem::path> inputs;
};

/// Raised when a forecast is asked for outside the tolling window.
class OffWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forecasts the five horizons at `at` from the fused series. Horizons
/// without a saved model of `algo` come back empty.
Forecast predict(const KeyValueConfig& kv, const Workspace& ws, TargetKind k,
                 models::Algorithm algo, LocalDateTime at);

/// Markdown summary of metrics.csv with each model's MAE change against
/// persistence.
std::string report(const Workspace& ws, TargetKind k);

}  // namespace tollcast::cli
