// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "table_fixture.hpp"
#include "tollcast/cli/app.hpp"
#include "tollcast/cli/pipeline.hpp"
#include "tollcast/core/digest.hpp"
#include "tollcast/eval/metrics.hpp"
#include "tollcast/eval/split.hpp"
#include "tollcast/fusion/series.hpp"
#include "tollcast/fusion/travel_time.hpp"
#include "tollcast/models/lstm.hpp"
#include "tollcast/models/mlp.hpp"
#include "tollcast/models/model.hpp"
#include "tollcast/numkit/optim.hpp"

using namespace tollcast;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// ---------------------------------------------------------------------------
// Shared 90-day workspaces
// ---------------------------------------------------------------------------

const fs::path kScratch = fs::temp_directory_path() / "tollcast_acceptance";

int tollcast_cmd(std::vector<std::string> args, const fs::path& config, const fs::path& out) {
  args.insert(args.begin(), "tollcast");
  args.insert(args.end(), {"--config", config.string(), "--out", out.string()});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (code != 0) std::cerr << fmt::format("tollcast {} failed ({}): {}", args[1], code, e.str());
  return code;
}

/// Runs synth, validate, fuse, the requested training, and evaluate.
struct PipelineRun {
  cli::Workspace ws;
  KeyValueConfig kv;
  TargetKind target = TargetKind::TollPrice;
  cli::EvaluateOutcome evaluation;
  double seconds = 0.0;

  PipelineRun(const std::string& name, const std::string& config_text, TargetKind k,
              const std::vector<std::string>& algos)
      : ws{kScratch / name}, target(k) {
    const auto t0 = Clock::now();
    fs::remove_all(ws.root);
    fs::create_directories(ws.root);
    const fs::path config = ws.root / "study.cfg";
    std::ofstream(config) << config_text;
    kv = KeyValueConfig::load(config);
    const std::string slug = cli::target_slug(k);
    for (const std::string cmd : {"synth", "validate", "fuse"}) {
      if (tollcast_cmd({cmd}, config, ws.root) != 0) throw std::runtime_error(cmd + " failed");
    }
    for (const auto& algo : algos) {
      if (tollcast_cmd({"train", "--algo", algo, "--horizon", "all", "--target", slug}, config,
                       ws.root) != 0) {
        throw std::runtime_error("train " + algo + " failed");
      }
    }
    evaluation = cli::evaluate(kv, ws, k, false);
    seconds = seconds_since(t0);
  }
};

const std::string kDefaultScenario = "days = 90\n";

/// Alternatives wide enough that they never congest: tt_diff sits near a
/// constant and moves little.
const std::string kFlatTtDiffScenario =
    "days = 90\n"
    "synth.alt1_capacity = 9000\n"
    "synth.alt2_capacity = 9000\n"
    "synth.alt1_length = 14\n"
    "synth.alt2_length = 14.5\n";

const std::vector<std::string> kTrained{"rf", "mlp", "lstm"};

PipelineRun& default_run() {
  static PipelineRun run("default", kDefaultScenario, TargetKind::TollPrice, kTrained);
  return run;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

struct Reference {
  double mae;
  double mape;
  double r2;
};

/// Textbook formulas in long double, one pass per quantity.
Reference reference_metrics(const std::vector<double>& y, const std::vector<double>& yhat,
                            double guard) {
  const auto n = static_cast<long double>(y.size());
  long double abs_err = 0, pct = 0, sum_y = 0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) abs_err += std::fabs((long double)y[i] - yhat[i]);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::fabs(y[i]) < guard) continue;
    pct += std::fabs((long double)y[i] - yhat[i]) / std::fabs((long double)y[i]);
    ++pct_n;
  }
  for (const double v : y) sum_y += v;
  const long double mean = sum_y / n;
  long double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double r = (long double)y[i] - yhat[i];
    const long double d = (long double)y[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  return {static_cast<double>(abs_err / n), static_cast<double>(pct / (long double)pct_n),
          static_cast<double>(1.0L - ss_res / ss_tot)};
}

Outcome metrics_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> len(2, 400);
  std::uniform_real_distribution<double> value(-100.0, 100.0), noise(-20.0, 20.0);
  constexpr double kGuard = 1.0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> y(static_cast<std::size_t>(len(rng))), yhat(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = value(rng);
      yhat[i] = y[i] + noise(rng);
    }
    if (std::none_of(y.begin(), y.end(), [](double v) { return std::abs(v) >= kGuard; })) {
      y[0] = 50.0;
    }
    const auto got = eval::compute_metrics(y, yhat, kGuard);
    const auto ref = reference_metrics(y, yhat, kGuard);
    if (!got.mape || !got.r2) return {false, fmt::format("pair {} lost MAPE or R2", trial)};
    for (const auto [a, b] :
         {std::pair{got.mae, ref.mae}, {*got.mape, ref.mape}, {*got.r2, ref.r2}}) {
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0,
          fmt::format("1000 pairs, worst deviation {:.2e}, {:.2f} s", worst, secs)};
}

numkit::Tensor random_batch(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  auto x = numkit::Tensor::matrix(n, p);
  for (auto& v : x.values()) v = z(rng);
  return x;
}

std::vector<double> positive_targets(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  constexpr std::size_t kInputs = 7;
  std::mt19937_64 rng(202);

  const MlpParams mp;
  auto mlp_net = models::mlp::init(kInputs, mp.hidden, rng);
  const auto x = random_batch(32, kInputs, rng);
  const auto y = positive_targets(32, rng);
  const numkit::LossFn mlp_loss = [&](numkit::ParamSet& p, numkit::Grads* g) {
    return models::mlp::loss_and_grad(p, x, y, mp.l2, g);
  };
  const auto m = numkit::grad_check(mlp_loss, mlp_net, 200, 1);

  const LstmParams lp;
  auto lstm_net = models::lstm::init(kInputs, lp.hidden, lp.dense, rng);
  models::lstm::Sequence seq;
  for (int t = 0; t < lp.lookback; ++t) seq.push_back(random_batch(16, kInputs, rng));
  const auto ys = positive_targets(16, rng);
  const numkit::LossFn lstm_loss = [&](numkit::ParamSet& p, numkit::Grads* g) {
    return models::lstm::loss_and_grad(p, seq, ys, 1e-4, g);
  };
  const auto l = numkit::grad_check(lstm_loss, lstm_net, 200, 2);

  const double secs = seconds_since(t0);
  const bool pass = m.probes == 200 && l.probes == 200 && m.max_relative_error < 1e-4 &&
                    l.max_relative_error < 1e-4 && secs < 60.0;
  return {pass, fmt::format("mlp max rel {:.2e} ({}), lstm W={} max rel {:.2e} ({}), {:.1f} s",
                            m.max_relative_error, m.worst_param, lp.lookback,
                            l.max_relative_error, l.worst_param, secs)};
}

Outcome fusion_identity() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> count(1, 40);
  std::uniform_real_distribution<double> len(0.05, 2.0), spd(5.0, 80.0);
  double worst_tt = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<RouteSegment> segs;
    std::vector<std::optional<double>> speeds;
    long double expected = 0.0L;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const double l = len(rng), v = spd(rng);
      segs.push_back({fmt::format("S{}", i), l});
      speeds.push_back(v);
      expected += static_cast<long double>(l) / v * 60.0L;
    }
    const RouteSpec route("R", Direction::EB, segs);
    const auto tt = fusion::route_travel_time(route, speeds);
    if (!tt) return {false, fmt::format("route {} gave no travel time", trial)};
    const double e = static_cast<double>(expected);
    worst_tt = std::max(worst_tt, std::abs(*tt - e) / e);
  }

  // Four full days of 15-minute counts cover every 6-minute bin exactly.
  const TimeGrid grid = TimeGrid::for_days(Date::parse("2019-07-01"), 4);
  std::uniform_int_distribution<int> vehicles(0, 900);
  std::map<LocalDateTime, double> periods;
  double in = 0.0;
  for (int p = 0; p < 4 * 96; ++p) {
    const double c = vehicles(rng);
    periods[grid.start().plus_minutes(15 * p)] = c;
    in += c;
  }
  double out = 0.0;
  for (const auto& v : fusion::resample_volume(periods, grid)) {
    if (!v) return {false, "resampled series has a gap"};
    out += *v;
  }
  const double drift = std::abs(out - in) / in;
  return {worst_tt <= 1e-9 && drift <= 1e-9,
          fmt::format("10000 routes worst rel {:.2e}, volume drift {:.2e} over {:.0f} vehicles",
                      worst_tt, drift, in)};
}

Outcome split_protocol() {
  std::vector<Date> days;
  const Date first = Date::parse("2018-01-01"), last = Date::parse("2019-06-30");
  for (Date d = first; d <= last; d = d + 1) {
    if (d.weekday() < 5) days.push_back(d);
  }
  const auto s = eval::make_split(days, 17);
  std::vector<Date> all;
  for (const auto* part : {&s.train_days, &s.validation_days, &s.test_days}) {
    all.insert(all.end(), part->begin(), part->end());
  }
  std::sort(all.begin(), all.end());
  const bool disjoint = std::adjacent_find(all.begin(), all.end()) == all.end() && all == days;
  const Date tail_start = days.back() + (1 - eval::kValidationDays);
  std::vector<Date> tail;
  for (const Date d : days) {
    if (d >= tail_start) tail.push_back(d);
  }
  const bool tail_ok = s.validation_days == tail;
  const bool deterministic = eval::make_split(days, 17) == s;
  const bool seeded = eval::make_split(days, 18).test_days != s.test_days;
  return {s.test_days.size() == 36 && tail_ok && disjoint && deterministic && seeded,
          fmt::format("{} test days, {} validation days in the last 21, disjoint={}, "
                      "deterministic={}, seed-sensitive={}",
                      s.test_days.size(), s.validation_days.size(), disjoint, deterministic,
                      seeded)};
}

Outcome forest_sanity() {
  const auto t0 = Clock::now();
  const auto target = [](const fusion::FeatureRow& r, int) {
    return 2.0 * r.tt_diff + static_cast<double>(r.toll_now.in_cents());
  };
  const auto train = fixture::random_table(30, 404, target);
  const auto held_out = fixture::random_table(10, 405, target, TargetKind::TollPrice,
                                              Date::parse("2019-03-04"));
  const auto art = models::fit_forest(train, HorizonIndex{1}, ForestParams{}, 406);
  std::vector<double> y, yhat;
  const auto preds = models::predict(art, held_out);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    y.push_back(held_out.rows()[i].target(HorizonIndex{1}));
    yhat.push_back(*preds[i]);
  }
  const double r2 = *eval::compute_metrics(y, yhat, 1.0).r2;
  const double secs = seconds_since(t0);
  return {r2 > 0.95 && secs < 60.0,
          fmt::format("held-out R2 {:.4f} on {} rows, {:.1f} s", r2, y.size(), secs)};
}

Outcome end_to_end_shape() {
  const auto& run = default_run();
  const auto& res = run.evaluation.result;
  const auto all = HorizonIndex::all();
  std::string detail = "persistence MAE";
  bool pass = run.seconds < 900.0;
  double previous = 0.0;
  for (const auto h : all) {
    const double mae = res.test(models::Algorithm::Persistence, h).mae;
    detail += fmt::format(" {:.1f}", mae);
    pass = pass && mae >= previous;
    previous = mae;
  }
  for (const auto& name : kTrained) {
    const auto a = models::parse_algorithm(name);
    double worst_gain = 1.0, worst_r2 = 1.0;
    for (const auto h : all) {
      const auto& m = res.test(a, h);
      worst_r2 = std::min(worst_r2, m.r2.value_or(-1.0));
      if (h.minutes() >= 18) {
        const double gain = 1.0 - m.mae / res.test(models::Algorithm::Persistence, h).mae;
        worst_gain = std::min(worst_gain, gain);
      }
    }
    pass = pass && worst_gain >= 0.20 && worst_r2 > 0.5;
    detail += fmt::format("; {} min gain 18-30 {:.0f}% min R2 {:.3f}", name, 100 * worst_gain,
                          worst_r2);
  }
  return {pass, detail + fmt::format("; pipeline {:.0f} s", run.seconds)};
}

Outcome persistence_definition() {
  const auto& run = default_run();
  const auto table = cli::load_table(run.ws, TargetKind::TollPrice);
  std::array<std::vector<std::optional<double>>, 5> preds;
  for (const auto h : HorizonIndex::all()) {
    preds[static_cast<std::size_t>(h.value() - 1)] =
        models::predict(models::fit_persistence(table, h), table);
  }
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < table.rows().size(); ++i) {
    for (std::size_t h = 1; h < 5; ++h) {
      if (!preds[h][i] || !preds[0][i] || !same_bits(*preds[h][i], *preds[0][i])) ++mismatches;
    }
  }
  // The scored records must agree too.
  std::map<LocalDateTime, std::vector<double>> by_time;
  for (const auto& p : run.evaluation.result.predictions) {
    if (p.algorithm == models::Algorithm::Persistence) by_time[p.timestamp].push_back(p.predicted);
  }
  for (const auto& [t, values] : by_time) {
    for (const double v : values) {
      if (!same_bits(v, values.front())) ++mismatches;
    }
  }
  return {mismatches == 0 && !table.rows().empty(),
          fmt::format("{} rows x 5 horizons, {} scored timestamps, {} mismatches",
                      table.rows().size(), by_time.size(), mismatches)};
}

Outcome determinism() {
  const auto& first = default_run();
  const PipelineRun second("rerun", kDefaultScenario, TargetKind::TollPrice, kTrained);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(first.ws.models(TargetKind::TollPrice))) {
    files.push_back(fs::relative(e.path(), first.ws.root));
  }
  for (const char* f : {"metrics.csv", "metrics_by_day.csv", "predictions.csv",
                        "errors_boxstats.csv"}) {
    files.push_back(fs::relative(first.ws.eval(TargetKind::TollPrice) / f, first.ws.root));
  }
  std::sort(files.begin(), files.end());
  std::size_t differing = 0;
  for (const auto& f : files) {
    if (file_digest(first.ws.root / f) != file_digest(second.ws.root / f)) ++differing;
  }

  // Save and load every trained network and forest, then compare predictions
  // bit for bit on 100 random rows with a value.
  const auto table = cli::load_table(first.ws, TargetKind::TollPrice);
  std::mt19937_64 rng(808);
  std::size_t compared = 0, round_trip_failures = 0;
  for (const auto& name : kTrained) {
    const auto path = first.ws.model_file(TargetKind::TollPrice, models::parse_algorithm(name),
                                          HorizonIndex{3});
    const auto art = models::load_model(path);
    const std::string bytes = models::serialize_model(art);
    const auto back = models::deserialize_model(bytes);
    if (models::serialize_model(back) != bytes) ++round_trip_failures;
    const auto a = models::predict(art, table);
    const auto b = models::predict(back, table);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i]) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(std::min<std::size_t>(100, rows.size()));
    for (const auto i : rows) {
      if (!b[i] || !same_bits(*a[i], *b[i])) ++round_trip_failures;
      ++compared;
    }
  }
  return {differing == 0 && round_trip_failures == 0 && compared == 300,
          fmt::format("{} files compared across reruns, {} differ; {} round-trip predictions, "
                      "{} mismatches",
                      files.size(), differing, compared, round_trip_failures)};
}

Outcome ttdiff_path() {
  const PipelineRun run("ttdiff", kFlatTtDiffScenario, TargetKind::TravelTimeDifference, {"mlp"});
  const auto table = cli::load_table(run.ws, TargetKind::TravelTimeDifference);
  double mean = 0.0, sq = 0.0;
  for (const auto& r : table.rows()) mean += r.tt_diff;
  mean /= static_cast<double>(table.rows().size());
  for (const auto& r : table.rows()) sq += (r.tt_diff - mean) * (r.tt_diff - mean);
  const double sd = std::sqrt(sq / static_cast<double>(table.rows().size()));

  const auto& res = run.evaluation.result;
  bool pass = true;
  std::string detail = fmt::format("tt_diff mean {:.2f} sd {:.2f} min; mlp vs persistence MAE",
                                   mean, sd);
  for (const auto h : HorizonIndex::all()) {
    const double mlp = res.test(models::Algorithm::Mlp, h).mae;
    const double base = res.test(models::Algorithm::Persistence, h).mae;
    pass = pass && mlp <= 1.1 * base;
    detail += fmt::format(" {}m {:.3f}/{:.3f} ({:+.0f}%)", h.minutes(), mlp, base,
                          100.0 * (mlp / base - 1.0));
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metrics oracle", metrics_oracle},
      {"gradient checks", gradient_checks},
      {"fusion identity", fusion_identity},
      {"split protocol", split_protocol},
      {"random forest sanity", forest_sanity},
      {"end-to-end shape", end_to_end_shape},
      {"persistence definition", persistence_definition},
      {"determinism and serialization", determinism},
      {"tt_diff target path", ttdiff_path},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, check] = criteria[i];
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("criterion {}: {} {}: {} ({:.1f} s)", i + 1,
                             o.pass ? "PASS" : "FAIL", name, o.detail, seconds_since(t0))
              << std::endl;
  }
  fs::remove_all(kScratch);
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
