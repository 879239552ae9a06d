#include "tollcast/synth/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <fmt/core.h>

#include "tollcast/core/seed.hpp"
#include "tollcast/core/tolling.hpp"
#include "tollcast/fusion/travel_time.hpp"
#include "tollcast/ingest/feeds.hpp"

namespace tollcast::synth {

namespace {

constexpr double kMinSpeedMph = 5.0;
constexpr std::array<double, 2> kLaneShares{0.55, 0.45};

double peak_center(const ScenarioConfig& c) {
  if (c.demand.peak_center_min >= 0.0) return c.demand.peak_center_min;
  return c.direction == Direction::EB ? 7.5 * 60.0 : 17.0 * 60.0;
}

std::int64_t round_to_step(double cents) {
  return static_cast<std::int64_t>(std::llround(cents / static_cast<double>(kTollStepCents))) *
         kTollStepCents;
}

TollingWindow study_window(const ScenarioConfig& c) {
  for (const auto& w : default_tolling_windows()) {
    if (w.direction == c.direction) return w;
  }
  throw std::logic_error("no tolling window for direction");
}

std::vector<RouteSegment> make_segments(const std::string& prefix, int count, double length) {
  // Uneven lengths that still sum to roughly `length`.
  std::vector<RouteSegment> out;
  double weight_sum = 0.0;
  std::vector<double> weights;
  for (int i = 0; i < count; ++i) {
    weights.push_back(1.0 + 0.35 * std::sin(1.7 * i + 0.4));
    weight_sum += weights.back();
  }
  for (int i = 0; i < count; ++i) {
    const double l = std::round(length * weights[static_cast<std::size_t>(i)] / weight_sum * 1000.0) / 1000.0;
    out.push_back({fmt::format("{}{:03d}", prefix, i + 1), std::max(l, 0.001)});
  }
  return out;
}

/// Speeds are written with two decimals; the simulation uses the written value.
double round_speed(double v) { return std::round(v * 100.0) / 100.0; }

struct RouteState {
  const RouteSpec* route;
  double capacity;
  double free_flow;
  std::vector<double> offsets;
  /// Per segment, sum of minute speeds in the current 6-minute bin.
  std::vector<double> bin_sum;
  int bin_minutes = 0;
};

}  // namespace

void ScenarioConfig::validate() const {
  if (days < 1) throw std::invalid_argument("synth: days must be >= 1");
  if (toll_segments < 1 || alt1_segments < 1 || alt2_segments < 1) {
    throw std::invalid_argument("synth: every route needs at least one segment");
  }
  if (!(controller.toll_min_cents > 0 && controller.toll_min_cents < controller.toll_max_cents)) {
    throw std::invalid_argument("synth: toll bounds need 0 < min < max");
  }
  if (controller.toll_min_cents % kTollStepCents != 0 ||
      controller.toll_max_cents % kTollStepCents != 0) {
    throw std::invalid_argument("synth: toll bounds must be multiples of 25 cents");
  }
  if (controller.toll_max_cents > ingest::kMaxTollCents) {
    throw std::invalid_argument("synth: toll max above the feed sanity bound");
  }
  if (!(demand.ar_coefficient >= 0.0 && demand.ar_coefficient < 1.0)) {
    throw std::invalid_argument("synth: AR(1) coefficient must lie in [0, 1)");
  }
  if (!(toll_capacity_vph > 0 && alt1_capacity_vph > 0 && alt2_capacity_vph > 0)) {
    throw std::invalid_argument("synth: capacities must be positive");
  }
  if (!(free_flow_mph > kMinSpeedMph && alt_free_flow_mph > kMinSpeedMph) ||
      free_flow_mph > ingest::kMaxSpeedMph || alt_free_flow_mph > ingest::kMaxSpeedMph) {
    throw std::invalid_argument("synth: free-flow speeds out of range");
  }
  if (!(toll_share_max > 0.0 && toll_share_max <= 1.0 && toll_share_scale_dollars > 0.0)) {
    throw std::invalid_argument("synth: toll share parameters out of range");
  }
  if (demand.peak_width_min <= 0.0) throw std::invalid_argument("synth: peak width must be > 0");
  if (emit_margin_min < 0) throw std::invalid_argument("synth: emit margin must be >= 0");
}

KeyValueConfig ScenarioConfig::to_keys() const {
  KeyValueConfig kv;
  auto d = [](double v) { return fmt::format("{}", v); };
  kv.set("start_date", start.str());
  kv.set("days", std::to_string(days));
  kv.set("seed", std::to_string(seed));
  kv.set("direction", std::string(to_string(direction)));
  kv.set("synth.toll_segments", std::to_string(toll_segments));
  kv.set("synth.alt1_segments", std::to_string(alt1_segments));
  kv.set("synth.alt2_segments", std::to_string(alt2_segments));
  kv.set("synth.toll_length", d(toll_length_miles));
  kv.set("synth.alt1_length", d(alt1_length_miles));
  kv.set("synth.alt2_length", d(alt2_length_miles));
  kv.set("synth.free_flow", d(free_flow_mph));
  kv.set("synth.alt_free_flow", d(alt_free_flow_mph));
  kv.set("synth.toll_capacity", d(toll_capacity_vph));
  kv.set("synth.alt1_capacity", d(alt1_capacity_vph));
  kv.set("synth.alt2_capacity", d(alt2_capacity_vph));
  kv.set("synth.segment_offset_sd", d(segment_offset_sd));
  kv.set("synth.speed_noise", d(speed_noise_mph));
  kv.set("synth.share_max", d(toll_share_max));
  kv.set("synth.share_scale", d(toll_share_scale_dollars));
  kv.set("synth.emit_margin", std::to_string(emit_margin_min));
  kv.set("synth.baseline", d(demand.baseline_vph));
  kv.set("synth.peak", d(demand.peak_vph));
  kv.set("synth.peak_center", d(demand.peak_center_min));
  kv.set("synth.peak_width", d(demand.peak_width_min));
  kv.set("synth.weekday_factor", d(demand.weekday_factor));
  kv.set("synth.weekend_factor", d(demand.weekend_factor));
  kv.set("synth.day_amplitude_sd", d(demand.day_amplitude_sd));
  kv.set("synth.day_shift_sd", d(demand.day_shift_sd));
  kv.set("synth.ar", d(demand.ar_coefficient));
  kv.set("synth.noise", d(demand.noise_vph));
  kv.set("synth.gain", d(controller.gain_cents_per_mph));
  kv.set("synth.toll_min", std::to_string(controller.toll_min_cents));
  kv.set("synth.toll_max", std::to_string(controller.toll_max_cents));
  kv.set("synth.toll_noise", d(controller.noise_cents));
  return kv;
}

ScenarioConfig scenario_config_from(const KeyValueConfig& kv) {
  ScenarioConfig c;
  c.start = Date::parse(kv.get_string("start_date", c.start.str()));
  c.days = static_cast<int>(kv.get_int("days", c.days));
  c.seed = kv.get_u64("seed", c.seed);
  c.direction = parse_direction(kv.get_string("direction", std::string(to_string(c.direction))));
  auto i = [&](const char* k, int fallback) { return static_cast<int>(kv.get_int(k, fallback)); };
  c.toll_segments = i("synth.toll_segments", c.toll_segments);
  c.alt1_segments = i("synth.alt1_segments", c.alt1_segments);
  c.alt2_segments = i("synth.alt2_segments", c.alt2_segments);
  c.toll_length_miles = kv.get_double("synth.toll_length", c.toll_length_miles);
  c.alt1_length_miles = kv.get_double("synth.alt1_length", c.alt1_length_miles);
  c.alt2_length_miles = kv.get_double("synth.alt2_length", c.alt2_length_miles);
  c.free_flow_mph = kv.get_double("synth.free_flow", c.free_flow_mph);
  c.alt_free_flow_mph = kv.get_double("synth.alt_free_flow", c.alt_free_flow_mph);
  c.toll_capacity_vph = kv.get_double("synth.toll_capacity", c.toll_capacity_vph);
  c.alt1_capacity_vph = kv.get_double("synth.alt1_capacity", c.alt1_capacity_vph);
  c.alt2_capacity_vph = kv.get_double("synth.alt2_capacity", c.alt2_capacity_vph);
  c.segment_offset_sd = kv.get_double("synth.segment_offset_sd", c.segment_offset_sd);
  c.speed_noise_mph = kv.get_double("synth.speed_noise", c.speed_noise_mph);
  c.toll_share_max = kv.get_double("synth.share_max", c.toll_share_max);
  c.toll_share_scale_dollars = kv.get_double("synth.share_scale", c.toll_share_scale_dollars);
  c.emit_margin_min = i("synth.emit_margin", c.emit_margin_min);
  auto& dm = c.demand;
  dm.baseline_vph = kv.get_double("synth.baseline", dm.baseline_vph);
  dm.peak_vph = kv.get_double("synth.peak", dm.peak_vph);
  dm.peak_center_min = kv.get_double("synth.peak_center", dm.peak_center_min);
  dm.peak_width_min = kv.get_double("synth.peak_width", dm.peak_width_min);
  dm.weekday_factor = kv.get_double("synth.weekday_factor", dm.weekday_factor);
  dm.weekend_factor = kv.get_double("synth.weekend_factor", dm.weekend_factor);
  dm.day_amplitude_sd = kv.get_double("synth.day_amplitude_sd", dm.day_amplitude_sd);
  dm.day_shift_sd = kv.get_double("synth.day_shift_sd", dm.day_shift_sd);
  dm.ar_coefficient = kv.get_double("synth.ar", dm.ar_coefficient);
  dm.noise_vph = kv.get_double("synth.noise", dm.noise_vph);
  auto& ct = c.controller;
  ct.gain_cents_per_mph = kv.get_double("synth.gain", ct.gain_cents_per_mph);
  ct.toll_min_cents = kv.get_int("synth.toll_min", ct.toll_min_cents);
  ct.toll_max_cents = kv.get_int("synth.toll_max", ct.toll_max_cents);
  ct.noise_cents = kv.get_double("synth.toll_noise", ct.noise_cents);
  c.validate();
  return c;
}

double Ar1::step(std::mt19937_64& rng) {
  state_ = phi_ * state_ + sigma_ * normal_(rng);
  return state_;
}

double deterministic_demand(Date day, int minute_of_day, const ScenarioConfig& config,
                            double amplitude_factor, double shift_min) {
  const auto& d = config.demand;
  const double z = (minute_of_day - peak_center(config) - shift_min) / d.peak_width_min;
  const double factor = day.weekday() < 5 ? d.weekday_factor : d.weekend_factor;
  return factor * (d.baseline_vph + amplitude_factor * d.peak_vph * std::exp(-0.5 * z * z));
}

double gen_demand(Date day, int minute_of_day, const ScenarioConfig& config, Ar1& noise,
                  std::mt19937_64& rng, double amplitude_factor, double shift_min) {
  const double base = deterministic_demand(day, minute_of_day, config, amplitude_factor, shift_min);
  return std::max(0.0, base + noise.step(rng));
}

double speed_from_flow(double flow_vph, double capacity_vph, double free_flow_mph,
                       double jitter) {
  if (!(capacity_vph > 0.0)) throw std::invalid_argument("capacity must be positive");
  const double r = flow_vph / capacity_vph;
  return std::max(kMinSpeedMph, free_flow_mph / (1.0 + r * r * r * r) + jitter);
}

std::int64_t toll_controller_step(std::int64_t toll_cents, double corridor_speed_mph,
                                  const ControllerParams& p, double noise_cents) {
  const double raw = static_cast<double>(toll_cents) +
                     p.gain_cents_per_mph * (kTargetSpeedMph - corridor_speed_mph) + noise_cents;
  const double clipped = std::clamp(raw, static_cast<double>(p.toll_min_cents),
                                    static_cast<double>(p.toll_max_cents));
  return std::clamp(round_to_step(clipped), p.toll_min_cents, p.toll_max_cents);
}

double toll_share(std::int64_t toll_cents, const ScenarioConfig& config) {
  const double dollars = static_cast<double>(toll_cents) / 100.0;
  return config.toll_share_max * std::exp(-dollars / config.toll_share_scale_dollars);
}

RouteSet scenario_routes(const ScenarioConfig& c) {
  const std::string dir(to_string(c.direction));
  RouteSpec toll("I66-" + dir, c.direction,
                 make_segments("I66" + dir + "-", c.toll_segments, c.toll_length_miles));
  RouteSpec alt1("GWPK-" + dir, c.direction,
                 make_segments("GWP" + dir + "-", c.alt1_segments, c.alt1_length_miles));
  RouteSpec alt2("US50-" + dir, c.direction,
                 make_segments("U50" + dir + "-", c.alt2_segments, c.alt2_length_miles));
  return RouteSet(std::move(toll), {std::move(alt1), std::move(alt2)});
}

std::vector<RampPair> scenario_ramp_pairs(Direction direction) {
  if (direction == Direction::EB) {
    return {{"I495", "Rosslyn", 1.0}, {"I495", "GlebeRd", 0.55}, {"Sycamore", "Rosslyn", 0.6}};
  }
  return {{"Rosslyn", "I495", 1.0}, {"Rosslyn", "Sycamore", 0.45}, {"GlebeRd", "I495", 0.55}};
}

ScenarioFiles generate_scenario(const ScenarioConfig& config, const std::filesystem::path& dir,
                                ScenarioSummary* summary) {
  config.validate();
  std::filesystem::create_directories(dir);
  ScenarioFiles files{dir / "toll.csv", dir / "speed.csv", dir / "volume.csv", dir / "routes.csv",
                      dir / "scenario.meta"};
  const RouteSet routes = scenario_routes(config);
  {
    std::ofstream out(files.routes, std::ios::binary | std::ios::trunc);
    write_routes_csv(out, routes);
  }
  {
    std::ofstream out(files.meta, std::ios::binary | std::ios::trunc);
    out << config.to_keys().canonical();
  }
  std::ofstream toll_out(files.toll, std::ios::binary | std::ios::trunc);
  std::ofstream speed_out(files.speed, std::ios::binary | std::ios::trunc);
  std::ofstream volume_out(files.volume, std::ios::binary | std::ios::trunc);
  if (!toll_out || !speed_out || !volume_out) {
    throw std::runtime_error("cannot write scenario files in " + dir.string());
  }
  toll_out << ingest::kTollHeader << "\n";
  speed_out << ingest::kSpeedHeader << "\n";
  volume_out << ingest::kVolumeHeader << "\n";

  ScenarioSummary local;
  ScenarioSummary& sum = summary ? *summary : local;
  sum = {};

  const TollingWindow window = study_window(config);
  const int period = ingest::kVolumePeriodMinutes;
  const int emit_begin = std::max(
      0, (window.daily_start.minutes - config.emit_margin_min) / period * period);
  const int emit_end = std::min(
      1440, (window.daily_end.minutes + config.emit_margin_min + period - 1) / period * period);

  std::vector<RouteState> states;
  {
    std::mt19937_64 rng(derive_seed(config.seed, "segments"));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto add = [&](const RouteSpec& r, double cap, double ff) {
      RouteState s{&r, cap, ff, {}, std::vector<double>(r.segments().size(), 0.0), 0};
      for (std::size_t i = 0; i < r.segments().size(); ++i) {
        s.offsets.push_back(config.segment_offset_sd * normal(rng));
      }
      states.push_back(std::move(s));
    };
    add(routes.toll, config.toll_capacity_vph, config.free_flow_mph);
    add(routes.alternatives[0], config.alt1_capacity_vph, config.alt_free_flow_mph);
    add(routes.alternatives[1], config.alt2_capacity_vph, config.alt_free_flow_mph);
  }
  const auto pairs = scenario_ramp_pairs(config.direction);
  const auto& dm = config.demand;

  for (int day_index = 0; day_index < config.days; ++day_index) {
    const Date day = config.start + day_index;
    const auto di = static_cast<std::uint64_t>(day_index);
    std::mt19937_64 demand_rng(derive_seed(config.seed, "demand", di));
    std::mt19937_64 speed_rng(derive_seed(config.seed, "speed", di));
    std::mt19937_64 toll_rng(derive_seed(config.seed, "toll", di));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double amplitude = std::max(0.2, 1.0 + dm.day_amplitude_sd * normal(demand_rng));
    const double shift = dm.day_shift_sd * normal(demand_rng);
    Ar1 noise(dm.ar_coefficient, dm.noise_vph);
    const bool tolling_day = window.active_on(day);
    std::int64_t toll = config.controller.toll_min_cents;
    double volume_acc = 0.0;

    for (int minute = emit_begin; minute < emit_end; ++minute) {
      const LocalDateTime ts(day, ClockTime{minute});
      const bool in_window = tolling_day && minute >= window.daily_start.minutes &&
                             minute < window.daily_end.minutes;
      const bool bin_start = minute % kStepMinutes == 0;
      const bool skip = in_dst_transition(ts);

      if (in_window && bin_start && !skip) {
        for (const auto& p : pairs) {
          const std::int64_t cents =
              p.fraction == 1.0 ? toll
                                : std::max(kTollStepCents,
                                           round_to_step(static_cast<double>(toll) * p.fraction));
          toll_out << ts.str() << ',' << p.entry << ',' << p.exit << ',' << cents << '\n';
          ++sum.toll_records;
        }
      }

      const double demand = gen_demand(day, minute, config, noise, demand_rng, amplitude, shift);
      const double share = toll_share(in_window ? toll : 0, config);
      const double hot_flow = demand * share;
      const double alt_flow = demand * (1.0 - share) / 2.0;
      for (std::size_t r = 0; r < states.size(); ++r) {
        auto& s = states[r];
        const double flow = r == 0 ? hot_flow : alt_flow;
        const auto& segs = s.route->segments();
        for (std::size_t i = 0; i < segs.size(); ++i) {
          const double jitter = s.offsets[i] + config.speed_noise_mph * normal(speed_rng);
          const double v = round_speed(
              std::min(ingest::kMaxSpeedMph, speed_from_flow(flow, s.capacity, s.free_flow, jitter)));
          s.bin_sum[i] += v;
          if (!skip) {
            speed_out << segs[i].segment_id << ',' << ts.str() << ',' << fmt::format("{:.2f}", v)
                      << '\n';
            ++sum.speed_records;
          }
        }
        ++s.bin_minutes;
      }

      volume_acc += hot_flow / 60.0;
      if ((minute + 1) % period == 0) {
        const LocalDateTime start(day, ClockTime{minute + 1 - period});
        const auto total = static_cast<std::int64_t>(std::llround(volume_acc));
        const auto first = static_cast<std::int64_t>(
            std::llround(static_cast<double>(total) * kLaneShares[0]));
        if (!in_dst_transition(start)) {
          volume_out << kVolumeStation << ',' << start.str() << ',' << kVolumeLanes[0] << ','
                     << first << '\n';
          volume_out << kVolumeStation << ',' << start.str() << ',' << kVolumeLanes[1] << ','
                     << total - first << '\n';
          sum.volume_records += 2;
          sum.volume_periods.emplace_back(volume_acc, total);
        }
        volume_acc = 0.0;
      }

      if ((minute + 1) % kStepMinutes == 0) {
        // Close the bin: the controller sees the bin's space-mean speed.
        auto& t = states[0];
        std::vector<fusion::SegmentObservation> obs;
        for (std::size_t i = 0; i < t.bin_sum.size(); ++i) {
          obs.push_back({t.route->segments()[i].length_miles, t.bin_sum[i] / t.bin_minutes});
        }
        const double v = fusion::space_mean_speed(obs);
        if (in_window) {
          const double n = config.controller.noise_cents * normal(toll_rng);
          toll = toll_controller_step(toll, v, config.controller, n);
        }
        for (auto& s : states) {
          std::fill(s.bin_sum.begin(), s.bin_sum.end(), 0.0);
          s.bin_minutes = 0;
        }
      }
    }
  }
  toll_out.flush();
  speed_out.flush();
  volume_out.flush();
  if (!toll_out || !speed_out || !volume_out) {
    throw std::runtime_error("failed writing scenario files in " + dir.string());
  }
  return files;
}

}  // namespace tollcast::synth
