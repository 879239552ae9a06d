#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tollcast::eval {

struct Metrics {
  std::size_t n = 0;
  double mae = 0.0;
  /// Mean |y - yhat| / |y| over entries with |y| >= guard; empty if none.
  std::optional<double> mape;
  /// 1 - SS_res / SS_tot; empty when SS_tot = 0.
  std::optional<double> r2;
};

/// Needs equal lengths of at least 2.
Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat,
                        double mape_guard);

/// Box-and-whisker summary of prediction errors (actual - predicted).
struct BoxStats {
  double min = 0.0;
  double whisker_low = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_high = 0.0;
  double max = 0.0;
  std::size_t outliers = 0;
};

/// Quantile by linear interpolation between order statistics at (n - 1) p.
double quantile(std::vector<double> sorted_values, double p);

/// Quartiles by linear interpolation; whiskers at the most extreme values
/// within 1.5 IQR of the box; points beyond are outliers. Needs >= 4 values.
BoxStats error_distribution(std::span<const double> errors);

}  // namespace tollcast::eval
