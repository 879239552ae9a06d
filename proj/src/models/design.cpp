#include "tollcast/models/design.hpp"

#include <cmath>

#include "tollcast/core/digest.hpp"

namespace tollcast::models {

Design make_design(const fusion::FeatureTable& table, HorizonIndex h) {
  Design d;
  d.rows = table.size();
  d.cols = table.feature_count();
  d.x.reserve(d.rows * d.cols);
  d.y.reserve(d.rows);
  for (const auto& r : table.rows()) {
    const auto f = table.features(r);
    d.x.insert(d.x.end(), f.begin(), f.end());
    d.y.push_back(r.target(h));
  }
  return d;
}

Standardizer Standardizer::fit(const Design& d) {
  Standardizer s;
  s.mean.assign(d.cols, 0.0);
  s.scale.assign(d.cols, 1.0);
  if (d.rows == 0) return s;
  const double n = static_cast<double>(d.rows);
  for (std::size_t j = 0; j < d.cols; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.rows; ++i) m += d.x[i * d.cols + j];
    m /= n;
    double v = 0.0;
    for (std::size_t i = 0; i < d.rows; ++i) {
      const double c = d.x[i * d.cols + j] - m;
      v += c * c;
    }
    const double sd = std::sqrt(v / n);
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(std::span<double> row) const {
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
}

double target_scale(std::span<const double> y) {
  if (y.empty()) return 1.0;
  double s = 0.0;
  for (double v : y) s += std::abs(v);
  s /= static_cast<double>(y.size());
  return s > 0.0 ? s : 1.0;
}

std::string days_digest(const fusion::FeatureTable& table) {
  std::string text;
  for (const auto& d : table.days()) text += d.str() + "\n";
  return to_hex(sha256(text));
}

}  // namespace tollcast::models
