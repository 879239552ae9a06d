#include "tollcast/eval/suite.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>

#include <fmt/core.h>

#include "tollcast/core/csv.hpp"
#include "tollcast/eval/svg.hpp"

namespace tollcast::eval {

using models::Algorithm;
using models::ModelArtifact;

const Metrics& SuiteResult::test(Algorithm a, HorizonIndex h) const {
  for (const auto& e : metrics) {
    if (e.algorithm == a && e.horizon == h && e.split == "test") return e.metrics;
  }
  throw std::out_of_range(fmt::format("no test metrics for {} at {} min", models::to_string(a),
                                      h.minutes()));
}

namespace {

struct Scored {
  std::vector<double> y;
  std::vector<double> yhat;
  std::vector<std::size_t> rows;
};

/// Rows where every model predicts, with each model's (actual, predicted).
std::vector<Scored> common_rows(const std::vector<const ModelArtifact*>& models,
                                const fusion::FeatureTable& table, HorizonIndex h) {
  std::vector<std::vector<std::optional<double>>> preds;
  for (const auto* m : models) preds.push_back(models::predict(*m, table));
  std::vector<Scored> out(models.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const bool all = std::all_of(preds.begin(), preds.end(), [&](const auto& p) { return p[i].has_value(); });
    if (!all) continue;
    const double y = table.rows()[i].target(h);
    for (std::size_t k = 0; k < models.size(); ++k) {
      out[k].y.push_back(y);
      out[k].yhat.push_back(*preds[k][i]);
      out[k].rows.push_back(i);
    }
  }
  return out;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : "NA"; }

void open_or_throw(std::ofstream& out, const std::filesystem::path& p) {
  out.open(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

SuiteResult evaluate_suite(const std::vector<ModelArtifact>& artifacts,
                           const fusion::FeatureTable& table, const SplitAssignment& split,
                           const SuiteOptions& options) {
  std::map<HorizonIndex, std::vector<const ModelArtifact*>> by_h;
  for (const auto& a : artifacts) {
    models::require_compatible(a, table);
    by_h[a.horizon].push_back(&a);
  }
  std::vector<ModelArtifact> baselines;
  baselines.reserve(by_h.size());
  for (auto& [h, list] : by_h) {
    std::sort(list.begin(), list.end(),
              [](const auto* a, const auto* b) { return a->algorithm < b->algorithm; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->algorithm == list[i - 1]->algorithm) {
        throw std::invalid_argument(fmt::format("two {} artifacts for horizon {} min",
                                                models::to_string(list[i]->algorithm), h.minutes()));
      }
    }
    if (list.front()->algorithm != Algorithm::Persistence) {
      baselines.push_back(models::fit_persistence(table, h));
      list.insert(list.begin(), &baselines.back());
    }
  }

  const auto test_table = table.subset(split.test_days);
  const auto train_table = table.subset(split.train_days);
  const double guard = fusion::target_guard(table.target_kind());
  SuiteResult r;
  for (const auto& [h, list] : by_h) {
    const auto scored = common_rows(list, test_table, h);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& s = scored[k];
      const Algorithm algo = list[k]->algorithm;
      r.metrics.push_back({algo, h, "test", compute_metrics(s.y, s.yhat, guard)});

      std::vector<double> errors(s.y.size());
      for (std::size_t i = 0; i < s.y.size(); ++i) errors[i] = s.y[i] - s.yhat[i];
      r.boxes.push_back({algo, h, error_distribution(errors)});

      std::map<Date, std::pair<std::vector<double>, std::vector<double>>> days;
      for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& row = test_table.rows()[s.rows[i]];
        auto& [y, yhat] = days[row.timestamp.date()];
        y.push_back(s.y[i]);
        yhat.push_back(s.yhat[i]);
        r.predictions.push_back({algo, h, row.timestamp, s.y[i], s.yhat[i]});
      }
      for (const auto& [day, vals] : days) {
        if (vals.first.size() < 2) continue;
        r.by_day.push_back({algo, h, day, compute_metrics(vals.first, vals.second, guard)});
      }
    }
    if (options.include_train) {
      const auto train_scored = common_rows(list, train_table, h);
      for (std::size_t k = 0; k < list.size(); ++k) {
        const auto& s = train_scored[k];
        r.metrics.push_back({list[k]->algorithm, h, "train", compute_metrics(s.y, s.yhat, guard)});
      }
    }
  }
  auto key = [](const auto& e) { return std::make_pair(e.algorithm, e.horizon); };
  std::stable_sort(r.metrics.begin(), r.metrics.end(), [&](const auto& a, const auto& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return a.split == "test" && b.split != "test";
  });
  std::stable_sort(r.boxes.begin(), r.boxes.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::stable_sort(r.by_day.begin(), r.by_day.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::stable_sort(r.predictions.begin(), r.predictions.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return r;
}

std::vector<std::filesystem::path> write_suite_outputs(const SuiteResult& result,
                                                       const fusion::FeatureTable& table,
                                                       const std::filesystem::path& dir,
                                                       bool svg) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  std::ofstream out;

  written.push_back(dir / "metrics.csv");
  open_or_throw(out, written.back());
  out << kMetricsHeader << "\n";
  for (const auto& e : result.metrics) {
    out << fmt::format("{},{},{},{},{},{}\n", models::to_string(e.algorithm), e.horizon.minutes(),
                       e.split, e.metrics.mae, fmt_opt(e.metrics.mape), fmt_opt(e.metrics.r2));
  }
  out.close();

  written.push_back(dir / "metrics_by_day.csv");
  open_or_throw(out, written.back());
  out << kMetricsByDayHeader << "\n";
  for (const auto& e : result.by_day) {
    out << fmt::format("{},{},{},{},{},{},{}\n", models::to_string(e.algorithm),
                       e.horizon.minutes(), e.day.str(), e.metrics.n, e.metrics.mae,
                       fmt_opt(e.metrics.mape), fmt_opt(e.metrics.r2));
  }
  out.close();

  written.push_back(dir / "errors_boxstats.csv");
  open_or_throw(out, written.back());
  out << kBoxStatsHeader << "\n";
  for (const auto& e : result.boxes) {
    const auto& b = e.stats;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", models::to_string(e.algorithm),
                       e.horizon.minutes(), b.min, b.whisker_low, b.q1, b.median, b.q3,
                       b.whisker_high, b.max, b.outliers);
  }
  out.close();

  written.push_back(dir / "predictions.csv");
  open_or_throw(out, written.back());
  out << kPredictionsHeader << "\n";
  for (const auto& p : result.predictions) {
    out << fmt::format("{},{},{},{},{}\n", models::to_string(p.algorithm), p.horizon.minutes(),
                       p.timestamp.str(), p.actual, p.predicted);
  }
  out.close();

  written.push_back(dir / "scatter_toll_vs_ttdiff.csv");
  open_or_throw(out, written.back());
  out << kScatterHeader << "\n";
  for (const auto& row : table.rows()) {
    out << fmt::format("{},{},{}\n", row.timestamp.str(), row.toll_now.in_cents(), row.tt_diff);
  }
  out.close();

  if (svg) {
    for (auto& p : write_svg_charts(result, table, dir)) written.push_back(std::move(p));
  }
  return written;
}

}  // namespace tollcast::eval
