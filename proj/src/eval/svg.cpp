#include "tollcast/eval/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <fmt/core.h>

#include "tollcast/eval/suite.hpp"

namespace tollcast::eval {

namespace {

using models::Algorithm;

constexpr double kWidth = 760, kHeight = 440;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;

const char* color(Algorithm a) {
  switch (a) {
    case Algorithm::Persistence: return "#7f7f7f";
    case Algorithm::RandomForest: return "#2ca02c";
    case Algorithm::Mlp: return "#1f77b4";
    case Algorithm::Lstm: return "#d62728";
  }
  return "#000000";
}

class Svg {
 public:
  explicit Svg(const std::string& title) {
    body_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    text(kWidth / 2, 22, title, "middle", 15);
  }
  void rect(double x, double y, double w, double h, const char* fill) {
    body_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                         x, y, w, h, fill);
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "#000000") {
    body_ += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", x1, y1,
        x2, y2, stroke);
  }
  void circle(double x, double y, double r, const char* fill, double opacity = 1.0) {
    body_ += fmt::format(
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\" fill-opacity=\"{}\"/>\n", x, y, r,
        fill, opacity);
  }
  void text(double x, double y, const std::string& s, const char* anchor = "start",
            int size = 12) {
    body_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n",
                         x, y, anchor, size, s);
  }
  void save(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body_ << "</svg>\n";
  }

 private:
  std::string body_;
};

/// Maps [lo, hi] onto the plot's vertical extent.
struct Scale {
  double lo, hi;
  double y(double v) const { return kTop + kPlotH * (1.0 - (v - lo) / (hi - lo)); }
};

Scale nice_scale(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

void axes(Svg& s, const Scale& sc, const std::string& ylabel) {
  s.line(kLeft, kTop, kLeft, kTop + kPlotH);
  s.line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH);
  for (int i = 0; i <= 4; ++i) {
    const double v = sc.lo + (sc.hi - sc.lo) * i / 4.0;
    s.line(kLeft - 4, sc.y(v), kLeft, sc.y(v));
    s.text(kLeft - 6, sc.y(v) + 4, fmt::format("{:.3g}", v), "end");
  }
  if (sc.lo < 0 && sc.hi > 0) s.line(kLeft, sc.y(0), kLeft + kPlotW, sc.y(0), "#bbbbbb");
  s.text(16, kTop + kPlotH / 2, ylabel, "middle");
}

void legend(Svg& s, const std::vector<Algorithm>& algos) {
  double y = kTop + 10;
  for (auto a : algos) {
    s.rect(kLeft + kPlotW + 20, y - 10, 12, 12, color(a));
    s.text(kLeft + kPlotW + 38, y, std::string(models::to_string(a)));
    y += 20;
  }
}

template <typename Entry>
std::pair<std::vector<Algorithm>, std::vector<HorizonIndex>> keys(const std::vector<Entry>& es) {
  std::set<Algorithm> a;
  std::set<HorizonIndex> h;
  for (const auto& e : es) {
    a.insert(e.algorithm);
    h.insert(e.horizon);
  }
  return {{a.begin(), a.end()}, {h.begin(), h.end()}};
}

void bar_chart(const SuiteResult& r, const std::string& name,
               const std::function<std::optional<double>(const Metrics&)>& get,
               const std::filesystem::path& path) {
  std::vector<MetricsEntry> test;
  for (const auto& e : r.metrics) {
    if (e.split == "test") test.push_back(e);
  }
  const auto [algos, horizons] = keys(test);
  double lo = 0.0, hi = 0.0;
  for (const auto& e : test) {
    if (auto v = get(e.metrics)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  const Scale sc = nice_scale(lo, hi);
  Svg s(fmt::format("Test {} by prediction horizon", name));
  axes(s, sc, name);
  const double group = kPlotW / static_cast<double>(std::max<std::size_t>(horizons.size(), 1));
  const double bar = group * 0.8 / static_cast<double>(std::max<std::size_t>(algos.size(), 1));
  for (std::size_t g = 0; g < horizons.size(); ++g) {
    const double gx = kLeft + group * static_cast<double>(g) + group * 0.1;
    s.text(gx + group * 0.4, kTop + kPlotH + 18, fmt::format("{} min", horizons[g].minutes()),
           "middle");
    for (std::size_t k = 0; k < algos.size(); ++k) {
      for (const auto& e : test) {
        if (e.algorithm != algos[k] || e.horizon != horizons[g]) continue;
        const auto v = get(e.metrics);
        if (!v) continue;
        const double y0 = sc.y(std::max(0.0, sc.lo)), y1 = sc.y(*v);
        s.rect(gx + bar * static_cast<double>(k), std::min(y0, y1), bar * 0.9, std::abs(y1 - y0),
               color(algos[k]));
      }
    }
  }
  legend(s, algos);
  s.save(path);
}

void box_chart(const SuiteResult& r, const std::filesystem::path& path) {
  const auto [algos, horizons] = keys(r.boxes);
  double lo = 0.0, hi = 0.0;
  for (const auto& e : r.boxes) {
    lo = std::min(lo, e.stats.min);
    hi = std::max(hi, e.stats.max);
  }
  const Scale sc = nice_scale(lo, hi);
  Svg s("Test prediction errors (actual - predicted)");
  axes(s, sc, "error");
  const double group = kPlotW / static_cast<double>(std::max<std::size_t>(horizons.size(), 1));
  const double slot = group * 0.8 / static_cast<double>(std::max<std::size_t>(algos.size(), 1));
  for (std::size_t g = 0; g < horizons.size(); ++g) {
    const double gx = kLeft + group * static_cast<double>(g) + group * 0.1;
    s.text(gx + group * 0.4, kTop + kPlotH + 18, fmt::format("{} min", horizons[g].minutes()),
           "middle");
    for (std::size_t k = 0; k < algos.size(); ++k) {
      for (const auto& e : r.boxes) {
        if (e.algorithm != algos[k] || e.horizon != horizons[g]) continue;
        const auto& b = e.stats;
        const double x = gx + slot * static_cast<double>(k), w = slot * 0.8, cx = x + w / 2;
        s.line(cx, sc.y(b.whisker_low), cx, sc.y(b.q1));
        s.line(cx, sc.y(b.q3), cx, sc.y(b.whisker_high));
        s.line(x + w * 0.25, sc.y(b.whisker_low), x + w * 0.75, sc.y(b.whisker_low));
        s.line(x + w * 0.25, sc.y(b.whisker_high), x + w * 0.75, sc.y(b.whisker_high));
        s.rect(x, sc.y(b.q3), w, std::max(sc.y(b.q1) - sc.y(b.q3), 0.5), color(algos[k]));
        s.line(x, sc.y(b.median), x + w, sc.y(b.median), "#ffffff");
      }
    }
  }
  legend(s, algos);
  s.save(path);
}

void scatter_chart(const fusion::FeatureTable& table, const std::filesystem::path& path) {
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  bool first = true;
  for (const auto& r : table.rows()) {
    const double x = r.tt_diff, y = r.toll_now.dollars();
    if (first) {
      xlo = xhi = x;
      ylo = yhi = y;
      first = false;
    }
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
  const Scale ys = nice_scale(std::min(0.0, ylo), yhi);
  const Scale xs = nice_scale(xlo, xhi);
  auto px = [&](double x) { return kLeft + kPlotW * (x - xs.lo) / (xs.hi - xs.lo); };
  Svg s("Toll vs travel time difference (tolling intervals)");
  axes(s, ys, "toll ($)");
  for (int i = 0; i <= 4; ++i) {
    const double v = xs.lo + (xs.hi - xs.lo) * i / 4.0;
    s.text(px(v), kTop + kPlotH + 18, fmt::format("{:.3g}", v), "middle");
  }
  s.text(kLeft + kPlotW / 2, kHeight - 10, "travel time difference (min)", "middle");
  for (const auto& r : table.rows()) s.circle(px(r.tt_diff), ys.y(r.toll_now.dollars()), 1.5, "#1f77b4", 0.4);
  s.save(path);
}

}  // namespace

std::vector<std::filesystem::path> write_svg_charts(const SuiteResult& result,
                                                    const fusion::FeatureTable& table,
                                                    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out{dir / "metrics_mae.svg", dir / "metrics_mape.svg",
                                         dir / "metrics_r2.svg", dir / "errors_box.svg",
                                         dir / "scatter_toll_vs_ttdiff.svg"};
  bar_chart(result, "MAE", [](const Metrics& m) { return std::optional<double>(m.mae); }, out[0]);
  bar_chart(result, "MAPE", [](const Metrics& m) { return m.mape; }, out[1]);
  bar_chart(result, "R2", [](const Metrics& m) { return m.r2; }, out[2]);
  box_chart(result, out[3]);
  scatter_chart(table, out[4]);
  return out;
}

}  // namespace tollcast::eval
