#include "tollcast/models/forest.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "tollcast/core/seed.hpp"

namespace tollcast::models {

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                       : n.right);
  }
  return nodes[i].value;
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return best;
}

int features_per_split(const ForestParams& params, std::size_t feature_count) {
  const int p = static_cast<int>(feature_count);
  const int m = params.features_per_split == 0 ? (p + 2) / 3 : params.features_per_split;
  if (m < 1 || m > p) {
    throw std::invalid_argument(fmt::format("features per split {} outside 1..{}", m, p));
  }
  return m;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Design& d, const ForestParams& params, std::mt19937_64& rng)
      : d_(d), params_(params), m_(features_per_split(params, d.cols)), rng_(rng) {}

  Tree build(std::vector<std::size_t> sample) {
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t>& idx, int depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double sum = 0.0;
    for (auto i : idx) sum += d_.y[i];
    const double n = static_cast<double>(idx.size());
    tree_.nodes[static_cast<std::size_t>(id)].value = sum / n;

    const bool constant = std::all_of(idx.begin(), idx.end(),
                                      [&](std::size_t i) { return d_.y[i] == d_.y[idx[0]]; });
    if (depth >= params_.max_depth || constant ||
        idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf_size)) {
      return id;
    }
    const Split s = best_split(idx, sum);
    if (s.feature < 0 || s.score <= sum * sum / n) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (d_.x[i * d_.cols + static_cast<std::size_t>(s.feature)] < s.threshold ? left : right)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  /// Maximizes sL^2/nL + sR^2/nR, which minimizes children SSE.
  Split best_split(const std::vector<std::size_t>& idx, double total) {
    std::vector<int> features(d_.cols);
    std::iota(features.begin(), features.end(), 0);
    for (int k = 0; k < m_; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(d_.cols) - 1);
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(rng_))]);
    }
    features.resize(static_cast<std::size_t>(m_));
    std::sort(features.begin(), features.end());

    const std::size_t n = idx.size();
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf_size);
    Split best;
    std::vector<std::pair<double, double>> xy(n);
    for (int f : features) {
      for (std::size_t k = 0; k < n; ++k) {
        xy[k] = {d_.x[idx[k] * d_.cols + static_cast<std::size_t>(f)], d_.y[idx[k]]};
      }
      std::sort(xy.begin(), xy.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += xy[k].second;
        if (xy[k].first == xy[k + 1].first) continue;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        if (best.feature < 0 || score > best.score) {
          double thr = xy[k].first + (xy[k + 1].first - xy[k].first) / 2.0;
          if (thr <= xy[k].first) thr = xy[k + 1].first;
          best = Split{f, thr, score};
        }
      }
    }
    return best;
  }

  const Design& d_;
  const ForestParams& params_;
  int m_;
  std::mt19937_64& rng_;
  Tree tree_;
};

}  // namespace

Tree fit_tree(const Design& d, std::span<const std::size_t> sample, const ForestParams& params,
              std::mt19937_64& rng) {
  if (sample.empty()) throw std::invalid_argument("cannot fit a tree on no rows");
  if (params.min_leaf_size < 1) throw std::invalid_argument("min_leaf_size must be >= 1");
  TreeBuilder builder(d, params, rng);
  return builder.build({sample.begin(), sample.end()});
}

double Forest::predict(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

Forest fit_forest(const Design& d, const ForestParams& params, std::uint64_t seed) {
  if (d.rows == 0) throw std::invalid_argument("cannot fit a forest on an empty table");
  if (params.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  features_per_split(params, d.cols);
  Forest forest{params, std::vector<Tree>(static_cast<std::size_t>(params.n_trees))};

  auto fit_one = [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, "tree", t));
    std::uniform_int_distribution<std::size_t> pick(0, d.rows - 1);
    std::vector<std::size_t> sample(d.rows);
    for (auto& s : sample) s = pick(rng);
    forest.trees[t] = fit_tree(d, sample, params, rng);
  };

  const std::size_t n = forest.trees.size();
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(params.threads, 1)), 1, n);
  if (threads == 1) {
    for (std::size_t t = 0; t < n; ++t) fit_one(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n; t += threads) fit_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return forest;
}

}  // namespace tollcast::models
