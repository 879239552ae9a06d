#include "tollcast/cli/app.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "tollcast/cli/pipeline.hpp"
#include "tollcast/core/digest.hpp"
#include "tollcast/numkit/tensor.hpp"
#include "tollcast/synth/scenario.hpp"

namespace tollcast::cli {

namespace {

using models::Algorithm;

struct Options {
  std::string config;
  std::string out = "tollcast-run";
  std::optional<std::uint64_t> seed;
  bool svg = false;
  std::string algo;
  std::string horizon = "all";
  std::string target;
  std::string at;
};

/// Inputs and outputs of one run, recorded in its manifest.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  KeyValueConfig kv;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

KeyValueConfig load_keys(const Options& o) {
  KeyValueConfig kv = o.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config);
  if (o.seed) kv.set("seed", std::to_string(*o.seed));
  return kv;
}

TargetKind target_of(const Options& o, const KeyValueConfig& kv) {
  return parse_target_kind(o.target.empty() ? kv.get_string("target", "toll") : o.target);
}

std::vector<HorizonIndex> horizons_of(const std::string& text) {
  if (text == "all") {
    const auto all = HorizonIndex::all();
    return {all.begin(), all.end()};
  }
  return {HorizonIndex{std::stoi(text)}};
}

void write_manifest(const Run& run, const Workspace& ws, double seconds, int code,
                    const std::string& error) {
  nlohmann::ordered_json j;
  j["command"] = run.command;
  j["argv"] = run.argv;
  j["config_digest"] = to_hex(sha256(run.kv.canonical()));
  j["seed"] = run.kv.get_u64("seed", kDefaultSeed);
  auto digests = [](const std::vector<std::filesystem::path>& paths) {
    nlohmann::ordered_json d = nlohmann::ordered_json::object();
    for (const auto& p : paths) {
      d[p.generic_string()] = std::filesystem::exists(p) ? file_digest(p) : std::string("missing");
    }
    return d;
  };
  j["inputs"] = digests(run.inputs);
  j["outputs"] = digests(run.outputs);
  j["exit_code"] = code;
  if (!error.empty()) j["error"] = error;
  j["wall_time_s"] = seconds;
  std::filesystem::create_directories(ws.manifests());
  std::ofstream out(ws.manifests() / (run.command + ".json"), std::ios::trunc);
  out << j.dump(2) << '\n';
}

std::string show(TargetKind k, double v) {
  return k == TargetKind::TollPrice ? fmt::format("${:.2f}", v / 100.0) : fmt::format("{:.2f} min", v);
}

void cmd_synth(const Options& o, Run& run, std::ostream& out) {
  const auto cfg = synth::scenario_config_from(run.kv);
  const Workspace ws{o.out};
  synth::ScenarioSummary summary;
  const auto files = synth::generate_scenario(cfg, ws.raw(), &summary);
  run.outputs = {files.toll, files.speed, files.volume, files.routes, files.meta};
  out << fmt::format("synthesized {} days from {} ({}), seed {}\n", cfg.days, cfg.start.str(),
                     to_string(cfg.direction), cfg.seed);
  out << fmt::format("  toll.csv    {} records\n  speed.csv   {} records\n  volume.csv  {} records\n",
                     summary.toll_records, summary.speed_records, summary.volume_records);
}

void cmd_validate(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  run.inputs = {ws.toll_feed(), ws.speed_feed(), ws.volume_feed(), ws.routes()};
  const auto check = validate_feeds(run.kv, ws);
  nlohmann::ordered_json j;
  auto feed = [&](const char* name, const ingest::FeedReport& r) {
    double min_cov = r.coverage.empty() ? 0.0 : 1.0;
    for (const auto& [k, c] : r.coverage) min_cov = std::min(min_cov, c);
    out << fmt::format("{:<7} rows {:>9}  accepted {:>9}  rejected {:>6}  duplicates {:>5}  keys {:>3}  min coverage {:.4f}\n",
                       name, r.total_rows, r.accepted, r.rejected.size(), r.duplicates.size(),
                       r.coverage.size(), min_cov);
    nlohmann::ordered_json f;
    f["total_rows"] = r.total_rows;
    f["accepted"] = r.accepted;
    f["rejected"] = r.rejected.size();
    nlohmann::ordered_json reasons = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.rejected.size() && i < 20; ++i) {
      reasons.push_back({{"line", r.rejected[i].line}, {"reason", r.rejected[i].reason}});
    }
    f["first_rejections"] = reasons;
    f["duplicates"] = r.duplicates.size();
    f["coverage"] = r.coverage;
    j[name] = f;
  };
  feed("toll", check.toll);
  feed("speed", check.speed);
  feed("volume", check.volume);
  const auto path = ws.root / "validation.json";
  std::ofstream(path, std::ios::trunc) << j.dump(2) << '\n';
  run.outputs = {path};
}

void cmd_fuse(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  run.inputs = {ws.toll_feed(), ws.speed_feed(), ws.volume_feed(), ws.routes()};
  const auto r = fuse(run.kv, ws);
  run.outputs = r.written;
  out << fmt::format("toll pair {}, volume station {}, {} duplicate records, {} speed bins imputed\n",
                     r.report.toll_pair, r.report.volume_station, r.report.duplicate_records,
                     r.report.speed_bins_imputed);
  for (const auto& [k, n] : r.rows) {
    out << fmt::format("  {:<6} {} rows; dropped {}\n", target_slug(k), n, r.drops.at(k).str());
  }
}

void cmd_train(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  const TargetKind k = target_of(o, run.kv);
  run.inputs = {ws.table_csv(k), ws.table_meta(k), ws.routes()};
  const auto trained =
      train(run.kv, ws, k, {models::parse_algorithm(o.algo)}, horizons_of(o.horizon));
  run.outputs.push_back(ws.split_file(k));
  for (const auto& m : trained) {
    run.outputs.push_back(m.path);
    const auto& info = m.artifact.info;
    std::string detail;
    if (m.artifact.algorithm == Algorithm::Mlp || m.artifact.algorithm == Algorithm::Lstm) {
      detail = fmt::format(", {} epochs, best validation MAPE {:.4f}", info.epochs_run,
                           info.best_validation_mape);
    }
    out << fmt::format("trained {} for {} min on {} rows in {:.1f} s{} -> {}\n",
                       models::to_string(m.artifact.algorithm), m.artifact.horizon.minutes(),
                       info.train_rows, m.seconds, detail, m.path.generic_string());
  }
}

void cmd_evaluate(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  const TargetKind k = target_of(o, run.kv);
  const auto r = evaluate(run.kv, ws, k, o.svg);
  run.inputs = r.inputs;
  run.outputs = r.written;
  out << fmt::format("{:<12} {:>8} {:>12} {:>10} {:>8}\n", "algorithm", "horizon", "MAE", "MAPE",
                     "R2");
  for (const auto& e : r.result.metrics) {
    if (e.split != "test") continue;
    out << fmt::format("{:<12} {:>4} min {:>12.4f} {:>10} {:>8}\n", models::to_string(e.algorithm),
                       e.horizon.minutes(), e.metrics.mae,
                       e.metrics.mape ? fmt::format("{:.4f}", *e.metrics.mape) : "NA",
                       e.metrics.r2 ? fmt::format("{:.4f}", *e.metrics.r2) : "NA");
  }
  out << "wrote " << ws.eval(k).generic_string() << "\n";
}

void cmd_predict(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  const TargetKind k = target_of(o, run.kv);
  const Algorithm algo = models::parse_algorithm(o.algo.empty() ? "rf" : o.algo);
  const auto f = predict(run.kv, ws, k, algo, LocalDateTime::parse(o.at));
  run.inputs = f.inputs;
  out << fmt::format("{} forecast issued at {}\n", target_slug(k), f.issued.str());
  out << fmt::format("{:>8}  {:<17} {:>12} {:>12}\n", "horizon", "for", models::to_string(algo),
                     "persistence");
  for (const auto& h : f.horizons) {
    out << fmt::format("{:>4} min  {:<17} {:>12} {:>12}\n", h.horizon.minutes(), h.at.str(),
                       h.model ? show(k, *h.model) : "NA", show(k, h.persistence));
  }
}

void cmd_report(const Options& o, Run& run, std::ostream& out) {
  const Workspace ws{o.out};
  const TargetKind k = target_of(o, run.kv);
  run.inputs = {ws.eval(k) / "metrics.csv"};
  const std::string text = report(ws, k);
  const auto path = ws.eval(k) / "report.md";
  std::ofstream(path, std::ios::trunc) << text;
  run.outputs = {path};
  out << text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Short-horizon toll and travel time difference forecasting", "tollcast"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Key = value study config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Workspace directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Overrides the config seed");
  };
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corridor scenario");
  auto* validate = app.add_subcommand("validate", "Parse the raw feeds and report coverage");
  auto* fuse_cmd = app.add_subcommand("fuse", "Build the fused series and feature tables");
  auto* train_cmd = app.add_subcommand("train", "Fit models on the train split");
  auto* eval_cmd = app.add_subcommand("evaluate", "Score saved models on the test split");
  auto* predict_cmd = app.add_subcommand("predict", "Forecast the next five intervals");
  auto* report_cmd = app.add_subcommand("report", "Summarize evaluation metrics");
  for (auto* s : {synth, validate, fuse_cmd, train_cmd, eval_cmd, predict_cmd, report_cmd}) {
    common(s);
  }
  const std::vector<std::string> algos{"persistence", "rf", "mlp", "lstm"};
  const std::vector<std::string> targets{"toll", "ttdiff"};
  train_cmd->add_option("--algo", o.algo, "Model family")->required()->check(CLI::IsMember(algos));
  train_cmd->add_option("--horizon", o.horizon, "1..5 or all")
      ->check(CLI::IsMember({"1", "2", "3", "4", "5", "all"}))
      ->capture_default_str();
  for (auto* s : {train_cmd, eval_cmd, predict_cmd, report_cmd}) {
    s->add_option("--target", o.target, "toll or ttdiff (default: config target)")
        ->check(CLI::IsMember(targets));
  }
  eval_cmd->add_flag("--svg", o.svg, "Also write SVG charts");
  predict_cmd->add_option("--at", o.at, "Forecast time, YYYY-MM-DDTHH:MM")->required();
  predict_cmd->add_option("--algo", o.algo, "Model family (default rf)")
      ->check(CLI::IsMember(algos));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Run r;
  r.command = chosen->get_name();
  for (int i = 0; i < argc; ++i) r.argv.emplace_back(argv[i]);
  const Workspace ws{o.out};
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitOk;
  std::string error;
  try {
    r.kv = load_keys(o);
    if (chosen == synth) cmd_synth(o, r, out);
    if (chosen == validate) cmd_validate(o, r, out);
    if (chosen == fuse_cmd) cmd_fuse(o, r, out);
    if (chosen == train_cmd) cmd_train(o, r, out);
    if (chosen == eval_cmd) cmd_evaluate(o, r, out);
    if (chosen == predict_cmd) cmd_predict(o, r, out);
    if (chosen == report_cmd) cmd_report(o, r, out);
  } catch (const numkit::NumericalError& e) {
    code = kExitNumerical;
    error = e.what();
  } catch (const std::exception& e) {
    code = kExitData;
    error = e.what();
  }
  if (code != kExitOk) err << "error: " << error << "\n";
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(r, ws, seconds, code, error);
  } catch (const std::exception& e) {
    err << "warning: manifest not written: " << e.what() << "\n";
  }
  return code;
}

}  // namespace tollcast::cli
