#pragma once

#include <array>
#include <cstdint>

namespace tollcast {

struct ForestParams {
  int n_trees = 200;
  int max_depth = 12;
  int min_leaf_size = 5;
  /// Features sampled per split; 0 selects ceil(p / 3).
  int features_per_split = 0;
  int threads = 1;
};

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

struct MlpParams {
  std::array<int, 4> hidden{64, 64, 32, 16};
  double l2 = 1e-4;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 15;
  AdamSettings adam;
};

struct LstmParams {
  int lookback = 10;
  int hidden = 32;
  std::array<int, 3> dense{32, 16, 8};
  double l2 = 0.0;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 15;
  AdamSettings adam;
};

}  // namespace tollcast
