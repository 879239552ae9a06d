#include "tollcast/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace tollcast::eval {

Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat,
                        double mape_guard) {
  if (y.size() != yhat.size()) throw std::invalid_argument("metric inputs differ in length");
  if (y.size() < 2) {
    throw std::invalid_argument(fmt::format("metrics need at least 2 values, got {}", y.size()));
  }
  Metrics m;
  m.n = y.size();
  const double n = static_cast<double>(y.size());
  double abs_sum = 0.0, pct_sum = 0.0, mean = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = std::abs(y[i] - yhat[i]);
    abs_sum += e;
    if (std::abs(y[i]) >= mape_guard) {
      pct_sum += e / std::abs(y[i]);
      ++pct_n;
    }
    mean += y[i];
  }
  m.mae = abs_sum / n;
  if (pct_n > 0) m.mape = pct_sum / static_cast<double>(pct_n);
  mean /= n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of no values");
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BoxStats error_distribution(std::span<const double> errors) {
  if (errors.size() < 4) {
    throw std::invalid_argument(
        fmt::format("error distribution needs at least 4 values, got {}", errors.size()));
  }
  std::vector<double> v(errors.begin(), errors.end());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile(v, 0.25);
  b.median = quantile(v, 0.5);
  b.q3 = quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      ++b.outliers;
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, x);
    b.whisker_high = std::max(b.whisker_high, x);
  }
  return b;
}

}  // namespace tollcast::eval
