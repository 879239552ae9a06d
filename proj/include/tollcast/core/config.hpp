#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tollcast/core/hyperparams.hpp"
#include "tollcast/core/route.hpp"
#include "tollcast/core/time_grid.hpp"
#include "tollcast/core/tolling.hpp"
#include "tollcast/core/types.hpp"

namespace tollcast {

/// Flat `key = value` file. `#` starts a comment, blank lines are ignored,
/// later keys override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Canonical `key = value\n` text in key order; digests are taken over this.
  std::string canonical() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

inline constexpr std::uint64_t kDefaultSeed = 20190701;

/// Everything a study run needs besides the raw feeds.
struct StudyConfig {
  StudyConfig(TimeGrid g, RouteSet r) : grid(g), routes(std::move(r)) {}

  TimeGrid grid;
  RouteSet routes;
  std::vector<TollingWindow> windows = default_tolling_windows();
  TargetKind target_kind = TargetKind::TollPrice;
  /// Ramp pair whose toll is the prediction target; empty selects the
  /// full-corridor pair, taken to be the pair with the largest summed toll
  /// since ramp ids carry no order.
  std::string toll_entry;
  std::string toll_exit;
  /// Volume count station; empty selects the lexicographically first one.
  std::string volume_station;
  bool calendar_features = true;
  int impute_max_gap = 2;
  ForestParams forest;
  MlpParams mlp;
  LstmParams lstm;
  std::uint64_t seed = kDefaultSeed;

  Direction direction() const { return routes.direction(); }
  void validate() const;
};

/// Builds a StudyConfig from parsed keys and an already-loaded route set.
/// Recognised keys are listed in README.md.
StudyConfig study_config_from(const KeyValueConfig& kv, RouteSet routes);

}  // namespace tollcast
