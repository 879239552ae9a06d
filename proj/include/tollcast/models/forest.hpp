#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tollcast/core/hyperparams.hpp"
#include "tollcast/models/design.hpp"

namespace tollcast::models {

struct TreeNode {
  /// -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Mean training target of the node.
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

/// CART regression tree; x[feature] < threshold goes left. Node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

/// Resolves features_per_split = 0 to ceil(p / 3) and checks 1 <= m <= p.
int features_per_split(const ForestParams& params, std::size_t feature_count);

/// Fits one tree on the design rows listed in `sample` (repeats allowed).
/// Each node samples m features without replacement and takes the split with
/// the smallest children SSE; ties go to the lowest feature index, then the
/// lowest threshold.
Tree fit_tree(const Design& d, std::span<const std::size_t> sample, const ForestParams& params,
              std::mt19937_64& rng);

struct Forest {
  ForestParams params;
  std::vector<Tree> trees;

  /// Mean of the tree outputs.
  double predict(std::span<const double> x) const;
  bool operator==(const Forest&) const = default;
};

/// Tree i sees a same-size bootstrap drawn from derive_seed(seed, "tree", i),
/// so growing n_trees leaves the earlier trees unchanged.
Forest fit_forest(const Design& d, const ForestParams& params, std::uint64_t seed);

}  // namespace tollcast::models
