#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tollcast/core/config.hpp"
#include "tollcast/core/datetime.hpp"
#include "tollcast/core/route.hpp"
#include "tollcast/core/types.hpp"

namespace tollcast::synth {

/// Daily corridor demand: (baseline + Gaussian peak) times a day-type factor,
/// plus AR(1) noise, in vehicles per hour.
struct DemandParams {
  double baseline_vph = 1500.0;
  double peak_vph = 4500.0;
  /// Peak center in minutes after midnight; negative picks 07:30 for EB and
  /// 17:00 for WB.
  double peak_center_min = -1.0;
  double peak_width_min = 50.0;
  double weekday_factor = 1.0;
  double weekend_factor = 0.5;
  /// Per-day multiplicative jitter on the peak amplitude (standard deviation).
  double day_amplitude_sd = 0.1;
  /// Per-day shift of the peak center in minutes (standard deviation).
  double day_shift_sd = 10.0;
  double ar_coefficient = 0.97;
  double noise_vph = 120.0;
};

/// Proportional speed-error controller on the full-corridor toll.
struct ControllerParams {
  double gain_cents_per_mph = 10.0;
  std::int64_t toll_min_cents = 50;
  std::int64_t toll_max_cents = 4000;
  double noise_cents = 10.0;
};

struct ScenarioConfig {
  Date start = Date::parse("2019-01-01");
  int days = 90;
  std::uint64_t seed = kDefaultSeed;
  Direction direction = Direction::EB;
  /// Segment counts of the toll route and the two alternatives.
  int toll_segments = 28;
  int alt1_segments = 22;
  int alt2_segments = 30;
  double toll_length_miles = 10.0;
  double alt1_length_miles = 12.0;
  double alt2_length_miles = 11.5;
  double free_flow_mph = 65.0;
  double alt_free_flow_mph = 55.0;
  double toll_capacity_vph = 3000.0;
  double alt1_capacity_vph = 2600.0;
  double alt2_capacity_vph = 3000.0;
  /// Fixed per-segment speed offset (standard deviation, mph).
  double segment_offset_sd = 1.5;
  /// Minute-to-minute speed noise per segment (standard deviation, mph).
  double speed_noise_mph = 1.0;
  /// Share of demand choosing the toll lanes at zero toll, and the price (in
  /// dollars) over which that share decays by a factor e.
  double toll_share_max = 0.8;
  double toll_share_scale_dollars = 8.0;
  /// Speed and volume records cover the direction's tolling window widened
  /// by this many minutes on each side, every day.
  int emit_margin_min = 30;
  DemandParams demand;
  ControllerParams controller;

  void validate() const;
  /// Canonical key = value text, as written to scenario.meta.
  KeyValueConfig to_keys() const;
};

/// Reads `start_date`, `days`, `seed`, `direction`, and `synth.*` keys.
ScenarioConfig scenario_config_from(const KeyValueConfig& kv);

/// AR(1) process x_t = phi x_{t-1} + sigma e_t, started at zero.
class Ar1 {
 public:
  Ar1(double phi, double sigma) : phi_(phi), sigma_(sigma) {}
  double step(std::mt19937_64& rng);
  double value() const { return state_; }

 private:
  double phi_;
  double sigma_;
  double state_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Noise-free part of the demand for one minute of a day, given the day's
/// amplitude factor and peak shift.
double deterministic_demand(Date day, int minute_of_day, const ScenarioConfig& config,
                            double amplitude_factor = 1.0, double shift_min = 0.0);

/// One minute of demand: deterministic part plus the next AR(1) draw,
/// clipped at 0.
double gen_demand(Date day, int minute_of_day, const ScenarioConfig& config, Ar1& noise,
                  std::mt19937_64& rng, double amplitude_factor = 1.0, double shift_min = 0.0);

/// BPR-style curve free_flow / (1 + (flow / capacity)^4) plus `jitter`,
/// floored at 5 mph. Throws std::invalid_argument if capacity <= 0.
double speed_from_flow(double flow_vph, double capacity_vph, double free_flow_mph,
                       double jitter = 0.0);

inline constexpr double kTargetSpeedMph = 55.0;
inline constexpr std::int64_t kTollStepCents = 25;

/// clip(toll + k (55 - speed) + noise) rounded to a 25 cent step.
std::int64_t toll_controller_step(std::int64_t toll_cents, double corridor_speed_mph,
                                  const ControllerParams& params, double noise_cents = 0.0);

/// Toll lane share of demand at a given toll.
double toll_share(std::int64_t toll_cents, const ScenarioConfig& config);

/// Route layout used by the scenario: the toll route plus two alternatives.
RouteSet scenario_routes(const ScenarioConfig& config);

/// Ramp pairs priced by the scenario and their fraction of the corridor toll.
struct RampPair {
  std::string entry;
  std::string exit;
  double fraction;
};
std::vector<RampPair> scenario_ramp_pairs(Direction direction);

/// Volume station and lanes, with each lane's share of the flow.
inline constexpr const char* kVolumeStation = "STN01";
inline constexpr std::array<const char*, 2> kVolumeLanes{"L1", "L2"};

struct ScenarioFiles {
  std::filesystem::path toll;
  std::filesystem::path speed;
  std::filesystem::path volume;
  std::filesystem::path routes;
  std::filesystem::path meta;
};

/// What generation produced, for bookkeeping checks.
struct ScenarioSummary {
  std::size_t toll_records = 0;
  std::size_t speed_records = 0;
  std::size_t volume_records = 0;
  /// Per emitted volume period: exact flow integral in vehicles and the
  /// lane-summed count written.
  std::vector<std::pair<double, std::int64_t>> volume_periods;
};

/// Writes toll.csv, speed.csv, volume.csv, routes.csv and scenario.meta into
/// `dir`. Output bytes depend only on the config.
ScenarioFiles generate_scenario(const ScenarioConfig& config, const std::filesystem::path& dir,
                                ScenarioSummary* summary = nullptr);

}  // namespace tollcast::synth
