#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tollcast/core/hyperparams.hpp"
#include "tollcast/core/types.hpp"
#include "tollcast/fusion/feature_table.hpp"
#include "tollcast/models/design.hpp"
#include "tollcast/models/forest.hpp"
#include "tollcast/numkit/params.hpp"

namespace tollcast::models {

enum class Algorithm : std::uint8_t { Persistence, RandomForest, Mlp, Lstm };

/// CLI spellings: persistence, rf, mlp, lstm.
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

/// Raised when an artifact and a feature table disagree on schema.
class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unreadable, truncated, or wrong-version artifact files.
class ArtifactFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct MlpModel {
  MlpParams params;
  numkit::ParamSet net;
  Standardizer standardizer;
  double target_scale = 1.0;
};

struct LstmModel {
  LstmParams params;
  numkit::ParamSet net;
  Standardizer standardizer;
  double target_scale = 1.0;
};

/// Provenance of the fitted parameters.
struct TrainingInfo {
  /// Which split supplied the standardization statistics; always "train".
  std::string stats_source = "train";
  std::uint64_t train_rows = 0;
  std::string train_days_digest;
  std::uint32_t epochs_run = 0;
  /// Validation MAPE of the kept snapshot; NaN when not applicable.
  double best_validation_mape = 0.0;
};

struct ModelArtifact {
  Algorithm algorithm = Algorithm::Persistence;
  TargetKind target_kind = TargetKind::TollPrice;
  HorizonIndex horizon{1};
  std::string schema_hash;
  std::uint64_t seed = 0;
  TrainingInfo info;
  std::variant<std::monostate, Forest, MlpModel, LstmModel> payload;
};

/// The row's current target-kind value, whatever the horizon.
double persistence_predict(const fusion::FeatureTable& table, const fusion::FeatureRow& row,
                           HorizonIndex h);

struct TrainSettings {
  ForestParams forest;
  MlpParams mlp;
  LstmParams lstm;
};

/// Fits one model for one horizon. Only `train` supplies parameters and
/// standardization statistics; `validation` is used for early stopping by the
/// networks and may be empty.
ModelArtifact train_model(Algorithm algo, const fusion::FeatureTable& train,
                          const fusion::FeatureTable& validation, HorizonIndex h,
                          const TrainSettings& settings, std::uint64_t seed);

ModelArtifact fit_persistence(const fusion::FeatureTable& train, HorizonIndex h);
ModelArtifact fit_forest(const fusion::FeatureTable& train, HorizonIndex h,
                         const ForestParams& params, std::uint64_t seed);
ModelArtifact fit_mlp(const fusion::FeatureTable& train, const fusion::FeatureTable& validation,
                      HorizonIndex h, const MlpParams& params, std::uint64_t seed);
ModelArtifact fit_lstm(const fusion::FeatureTable& train, const fusion::FeatureTable& validation,
                       HorizonIndex h, const LstmParams& params, std::uint64_t seed);

/// Throws SchemaMismatch unless the artifact was trained on this table schema.
void require_compatible(const ModelArtifact& a, const fusion::FeatureTable& table);

/// One prediction per table row, in target units. The LSTM has none for rows
/// without a full same-day lookback window.
std::vector<std::optional<double>> predict(const ModelArtifact& a,
                                           const fusion::FeatureTable& table);

void save_model(const ModelArtifact& a, std::ostream& out);
ModelArtifact load_model(std::istream& in);
void save_model(const ModelArtifact& a, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

/// Exact serialized bytes, checksum included.
std::string serialize_model(const ModelArtifact& a);
ModelArtifact deserialize_model(std::string_view bytes);

}  // namespace tollcast::models
