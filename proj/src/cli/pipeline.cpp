#include "tollcast/cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "tollcast/core/csv.hpp"
#include "tollcast/core/seed.hpp"
#include "tollcast/core/tolling.hpp"
#include "tollcast/eval/split.hpp"

namespace tollcast::cli {

using models::Algorithm;
using models::ModelArtifact;

namespace {

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

template <typename Record>
std::vector<std::string> keys_of(const std::vector<Record>& records) {
  std::set<std::string> keys;
  for (const auto& r : records) keys.insert(ingest::series_key(r));
  return {keys.begin(), keys.end()};
}

template <typename Record>
ingest::FeedReport checked(const ingest::ParsedFeed<Record>& parsed, const TimeGrid& grid,
                           const std::vector<std::string>& expected,
                           const std::vector<IntervalIndex>& bins) {
  auto report = ingest::coverage(parsed.records, grid, expected, bins);
  report.total_rows = parsed.report.total_rows;
  report.rejected = parsed.report.rejected;
  return report;
}

struct Feeds {
  ingest::ParsedFeed<ingest::TollFeedRecord> toll;
  ingest::ParsedFeed<ingest::SpeedFeedRecord> speed;
  ingest::ParsedFeed<ingest::VolumeFeedRecord> volume;
};

Feeds read_feeds(const Workspace& ws) {
  Feeds f;
  auto toll = open_in(ws.toll_feed());
  f.toll = ingest::parse_toll_feed(toll);
  auto speed = open_in(ws.speed_feed());
  f.speed = ingest::parse_speed_feed(speed);
  auto volume = open_in(ws.volume_feed());
  f.volume = ingest::parse_volume_feed(volume);
  return f;
}

}  // namespace

std::string target_slug(TargetKind k) {
  return k == TargetKind::TollPrice ? "toll" : "ttdiff";
}

std::filesystem::path Workspace::table_csv(TargetKind k) const {
  return features() / ("features_" + target_slug(k) + ".csv");
}
std::filesystem::path Workspace::table_meta(TargetKind k) const {
  return features() / ("features_" + target_slug(k) + ".meta");
}
std::filesystem::path Workspace::split_file(TargetKind k) const {
  return features() / ("split_" + target_slug(k) + ".csv");
}
std::filesystem::path Workspace::models(TargetKind k) const {
  return root / "models" / target_slug(k);
}
std::filesystem::path Workspace::model_file(TargetKind k, Algorithm a, HorizonIndex h) const {
  return models(k) / fmt::format("{}_h{}.model", models::to_string(a), h.value());
}
std::filesystem::path Workspace::eval(TargetKind k) const { return root / "eval" / target_slug(k); }

StudyConfig load_study(const KeyValueConfig& kv, const Workspace& ws) {
  auto in = open_in(ws.routes());
  StudyConfig study = study_config_from(kv, read_routes_csv(in));
  study.validate();
  return study;
}

double FeedCheck::min_coverage() const {
  double m = 1.0;
  for (const auto* r : {&toll, &speed, &volume}) {
    for (const auto& [key, c] : r->coverage) m = std::min(m, c);
    if (r->coverage.empty()) m = 0.0;
  }
  return m;
}

FeedCheck validate_feeds(const KeyValueConfig& kv, const Workspace& ws) {
  const StudyConfig study = load_study(kv, ws);
  const Feeds f = read_feeds(ws);
  const auto bins = tolling_intervals(study.grid, study.windows, study.direction());
  std::vector<std::string> segments;
  std::vector<const RouteSpec*> routes{&study.routes.toll};
  for (const auto& r : study.routes.alternatives) routes.push_back(&r);
  for (const auto* r : routes) {
    for (const auto& s : r->segments()) segments.push_back(s.segment_id);
  }
  FeedCheck out;
  out.toll = checked(f.toll, study.grid, keys_of(f.toll.records), bins);
  out.speed = checked(f.speed, study.grid, segments, bins);
  out.volume = checked(f.volume, study.grid, keys_of(f.volume.records), bins);
  return out;
}

FuseOutcome fuse(const KeyValueConfig& kv, const Workspace& ws) {
  StudyConfig study = load_study(kv, ws);
  Feeds f = read_feeds(ws);
  FuseOutcome out;
  const auto series = fusion::fuse_feeds(study, std::move(f.toll.records),
                                         std::move(f.speed.records), std::move(f.volume.records),
                                         &out.report);
  {
    auto csv = open_out(ws.fused_series());
    fusion::write_fused_series(csv, study.grid, series);
    out.written.push_back(ws.fused_series());
  }
  for (const TargetKind k : {TargetKind::TollPrice, TargetKind::TravelTimeDifference}) {
    study.target_kind = k;
    const auto table = fusion::build_feature_table(study, series);
    auto csv = open_out(ws.table_csv(k));
    auto meta = open_out(ws.table_meta(k));
    fusion::write_feature_table(csv, meta, table);
    out.drops[k] = table.drops();
    out.rows[k] = table.size();
    out.written.push_back(ws.table_csv(k));
    out.written.push_back(ws.table_meta(k));
  }
  return out;
}

fusion::FeatureTable load_table(const Workspace& ws, TargetKind k) {
  auto csv = open_in(ws.table_csv(k));
  auto meta = open_in(ws.table_meta(k));
  return fusion::read_feature_table(csv, meta);
}

std::uint64_t model_seed(std::uint64_t seed, Algorithm a, HorizonIndex h) {
  return derive_seed(seed, "model:" + std::string(models::to_string(a)),
                     static_cast<std::uint64_t>(h.value()));
}

std::vector<TrainedModel> train(const KeyValueConfig& kv, const Workspace& ws, TargetKind k,
                                const std::vector<Algorithm>& algos,
                                const std::vector<HorizonIndex>& horizons) {
  const StudyConfig study = load_study(kv, ws);
  const auto table = load_table(ws, k);
  const std::string wanted = fusion::schema_hash(k, study.calendar_features);
  if (table.schema_hash() != wanted) {
    throw models::SchemaMismatch(fmt::format("schema hash mismatch: config {} vs table {}",
                                             wanted, table.schema_hash()));
  }
  const auto split = eval::make_split(table.days(), study.seed);
  {
    auto out = open_out(ws.split_file(k));
    out << "date,split\n";
    std::vector<std::pair<Date, const char*>> all;
    for (const Date d : split.train_days) all.emplace_back(d, "train");
    for (const Date d : split.validation_days) all.emplace_back(d, "validation");
    for (const Date d : split.test_days) all.emplace_back(d, "test");
    std::sort(all.begin(), all.end());
    for (const auto& [d, s] : all) out << d.str() << ',' << s << '\n';
  }
  const auto train_table = table.subset(split.train_days);
  const auto validation_table = table.subset(split.validation_days);
  const models::TrainSettings settings{study.forest, study.mlp, study.lstm};

  std::vector<TrainedModel> out;
  for (const Algorithm a : algos) {
    for (const HorizonIndex h : horizons) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainedModel m;
      m.artifact = models::train_model(a, train_table, validation_table, h, settings,
                                       model_seed(study.seed, a, h));
      m.path = ws.model_file(k, a, h);
      std::filesystem::create_directories(m.path.parent_path());
      models::save_model(m.artifact, m.path);
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.push_back(std::move(m));
    }
  }
  return out;
}

EvaluateOutcome evaluate(const KeyValueConfig& kv, const Workspace& ws, TargetKind k, bool svg) {
  const StudyConfig study = load_study(kv, ws);
  const auto table = load_table(ws, k);
  EvaluateOutcome out;
  out.inputs = {ws.table_csv(k), ws.table_meta(k)};
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(ws.models(k))) {
    for (const auto& e : std::filesystem::directory_iterator(ws.models(k))) {
      if (e.path().extension() == ".model") files.push_back(e.path());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("no trained models in " + ws.models(k).string() + "; run train first");
  }
  std::sort(files.begin(), files.end());
  std::vector<ModelArtifact> artifacts;
  for (const auto& p : files) {
    artifacts.push_back(models::load_model(p));
    out.inputs.push_back(p);
  }
  const auto split = eval::make_split(table.days(), study.seed);
  out.result = eval::evaluate_suite(artifacts, table, split, {.include_train = true});
  out.written = eval::write_suite_outputs(out.result, table, ws.eval(k), svg);
  return out;
}

Forecast predict(const KeyValueConfig& kv, const Workspace& ws, TargetKind k, Algorithm algo,
                 LocalDateTime at) {
  const StudyConfig study = load_study(kv, ws);
  const Direction dir = study.direction();
  if (at.minute_of_day() % kStepMinutes != 0) {
    throw std::invalid_argument(
        fmt::format("timestamp {} is not on a 6-minute bin boundary", at.str()));
  }
  if (!study.grid.contains(at) || !is_tolling(at, dir, study.windows) || in_dst_transition(at)) {
    throw OffWindow(fmt::format(
        "no toll is defined at {}: it is outside the {} tolling window of the study period",
        at.str(), to_string(dir)));
  }
  auto in = open_in(ws.fused_series());
  const auto series = fusion::read_fused_series(in, study.grid);
  const IntervalIndex t = study.grid.interval_of(at);
  const auto now = fusion::features_at(study, series, t);
  if (!now) throw std::runtime_error(fmt::format("feature inputs are missing at {}", at.str()));

  Forecast f;
  f.issued = at;
  f.algorithm = algo;
  f.inputs = {ws.fused_series()};
  const double current =
      k == TargetKind::TollPrice ? static_cast<double>(now->toll_now.in_cents()) : now->tt_diff;
  for (const HorizonIndex h : HorizonIndex::all()) {
    HorizonForecast hf{h, at.plus_minutes(h.minutes()), std::nullopt, current};
    const auto path = ws.model_file(k, algo, h);
    if (std::filesystem::exists(path)) {
      const auto artifact = models::load_model(path);
      f.inputs.push_back(path);
      int lookback = 1;
      if (const auto* l = std::get_if<models::LstmModel>(&artifact.payload)) {
        lookback = l->params.lookback;
      }
      std::vector<fusion::FeatureRow> rows;
      for (IntervalIndex u = t - lookback + 1; u <= t; ++u) {
        auto r = fusion::features_at(study, series, u);
        if (!r || r->timestamp.date() != at.date()) {
          rows.clear();
          break;
        }
        rows.push_back(*r);
      }
      if (!rows.empty()) {
        const fusion::FeatureTable window(k, study.calendar_features, "", std::move(rows));
        hf.model = models::predict(artifact, window).back();
      }
    }
    f.horizons.push_back(hf);
  }
  return f;
}

std::string report(const Workspace& ws, TargetKind k) {
  auto in = open_in(ws.eval(k) / "metrics.csv");
  csv::Reader reader(in);
  reader.next();  // header
  struct Line {
    std::string algo;
    int horizon;
    std::string mae, mape, r2;
  };
  std::vector<Line> test;
  std::map<int, double> baseline;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() != 6 || f[2] != "test") continue;
    Line l{f[0], std::stoi(f[1]), f[3], f[4], f[5]};
    if (l.algo == "persistence") baseline[l.horizon] = std::stod(l.mae);
    test.push_back(std::move(l));
  }
  std::ostringstream out;
  out << fmt::format("# Test metrics ({} target)\n\n", target_slug(k));
  out << "| algorithm | horizon (min) | MAE | MAPE | R2 | MAE vs persistence |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& l : test) {
    std::string change = "";
    if (l.algo != "persistence" && baseline.count(l.horizon) && baseline[l.horizon] > 0) {
      change = fmt::format("{:+.1f}%", 100.0 * (std::stod(l.mae) / baseline[l.horizon] - 1.0));
    }
    auto num = [](const std::string& s) {
      return s == "NA" ? s : fmt::format("{:.4g}", std::stod(s));
    };
    out << fmt::format("| {} | {} | {} | {} | {} | {} |\n", l.algo, l.horizon, num(l.mae),
                       num(l.mape), num(l.r2), change);
  }
  return out.str();
}

}  // namespace tollcast::cli
