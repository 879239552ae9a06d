#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tollcast/core/types.hpp"
#include "tollcast/fusion/feature_table.hpp"

namespace tollcast::models {

/// Row-major feature matrix with one target per row.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
};

/// Raw features of every table row and the target at horizon h.
Design make_design(const fusion::FeatureTable& table, HorizonIndex h);

/// Per-column affine map to zero mean and unit variance. Columns with zero
/// spread keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Design& d);
  void apply(std::span<double> row) const;
  bool operator==(const Standardizer&) const = default;
};

/// Positive divisor applied to targets before network training: the mean
/// absolute training target, or 1 when that is zero. MAPE is unchanged by it.
double target_scale(std::span<const double> y);

/// Digest of the distinct dates in a table; records which days trained a model.
std::string days_digest(const fusion::FeatureTable& table);

}  // namespace tollcast::models
