#include "tollcast/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/core.h>

#include "tollcast/core/seed.hpp"
#include "tollcast/models/lstm.hpp"
#include "tollcast/models/mlp.hpp"
#include "tollcast/numkit/ops.hpp"
#include "tollcast/numkit/optim.hpp"

namespace tollcast::models {

using numkit::NumericalError;
using numkit::Tensor;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Persistence: return "persistence";
    case Algorithm::RandomForest: return "rf";
    case Algorithm::Mlp: return "mlp";
    case Algorithm::Lstm: return "lstm";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "persistence") return Algorithm::Persistence;
  if (s == "rf") return Algorithm::RandomForest;
  if (s == "mlp") return Algorithm::Mlp;
  if (s == "lstm") return Algorithm::Lstm;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}'", s));
}

double persistence_predict(const fusion::FeatureTable& table, const fusion::FeatureRow& row,
                           HorizonIndex) {
  return table.current_target(row);
}

namespace {

ModelArtifact base_artifact(Algorithm algo, const fusion::FeatureTable& train, HorizonIndex h,
                            std::uint64_t seed) {
  ModelArtifact a;
  a.algorithm = algo;
  a.target_kind = train.target_kind();
  a.horizon = h;
  a.schema_hash = train.schema_hash();
  a.seed = seed;
  a.info.train_rows = train.size();
  a.info.train_days_digest = days_digest(train);
  a.info.best_validation_mape = std::numeric_limits<double>::quiet_NaN();
  return a;
}

/// Standardized features of every table row, one vector per row.
std::vector<std::vector<double>> standardized_rows(const fusion::FeatureTable& table,
                                                   const Standardizer& s) {
  std::vector<std::vector<double>> out;
  out.reserve(table.size());
  for (const auto& r : table.rows()) {
    auto f = table.features(r);
    s.apply(f);
    out.push_back(std::move(f));
  }
  return out;
}

Tensor gather_rows(const std::vector<std::vector<double>>& rows,
                   std::span<const std::size_t> pick) {
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  Tensor x = Tensor::matrix(pick.size(), p);
  for (std::size_t i = 0; i < pick.size(); ++i) {
    std::copy(rows[pick[i]].begin(), rows[pick[i]].end(), x.data() + i * p);
  }
  return x;
}

/// steps[t] holds, for each window end e in `ends`, row e - (W - 1) + t.
lstm::Sequence gather_windows(const std::vector<std::vector<double>>& rows,
                              std::span<const std::size_t> ends, int window) {
  lstm::Sequence seq;
  std::vector<std::size_t> pick(ends.size());
  for (int t = 0; t < window; ++t) {
    for (std::size_t i = 0; i < ends.size(); ++i) {
      pick[i] = ends[i] - static_cast<std::size_t>(window - 1 - t);
    }
    seq.push_back(gather_rows(rows, pick));
  }
  return seq;
}

std::vector<double> scaled_targets(const fusion::FeatureTable& table, HorizonIndex h,
                                   double scale) {
  std::vector<double> y;
  y.reserve(table.size());
  for (const auto& r : table.rows()) y.push_back(r.target(h) / scale);
  return y;
}

void require_finite(double v, std::string_view what, int epoch, std::size_t batch) {
  if (!std::isfinite(v)) {
    throw NumericalError(fmt::format("non-finite {} at epoch {} batch {}", what, epoch, batch));
  }
}

/// Mini-batch Adam over shuffled epochs with early stopping on a validation
/// MAPE. `batch_loss` computes loss and grads for a list of example indices;
/// `validate` returns the current validation MAPE.
template <typename BatchLoss, typename Validate>
std::uint32_t train_loop(numkit::ParamSet& net, std::size_t examples, int batch_size,
                         int min_batch, int max_epochs, int patience, const AdamSettings& adam,
                         std::uint64_t shuffle_seed, BatchLoss batch_loss, Validate validate,
                         double& best_metric) {
  numkit::AdamState state(net, adam);
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(examples);
  for (std::size_t i = 0; i < examples; ++i) order[i] = i;
  numkit::ParamSet best = net;
  best_metric = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::uint32_t epochs = 0;
  numkit::Grads grads;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < examples; start += bs, ++batch_no) {
      const std::size_t len = std::min(bs, examples - start);
      if (len < static_cast<std::size_t>(min_batch)) continue;
      const std::span<const std::size_t> pick(order.data() + start, len);
      const double loss = batch_loss(pick, &grads);
      require_finite(loss, "training loss", epoch, batch_no);
      numkit::adam_step(net, grads, state);
    }
    ++epochs;
    const double metric = validate();
    require_finite(metric, "validation loss", epoch, batch_no);
    if (metric < best_metric) {
      best_metric = metric;
      best = net;
      stale = 0;
    } else if (++stale >= patience) {
      break;
    }
  }
  net = std::move(best);
  return epochs;
}

}  // namespace

ModelArtifact fit_persistence(const fusion::FeatureTable& train, HorizonIndex h) {
  return base_artifact(Algorithm::Persistence, train, h, 0);
}

ModelArtifact fit_forest(const fusion::FeatureTable& train, HorizonIndex h,
                         const ForestParams& params, std::uint64_t seed) {
  ModelArtifact a = base_artifact(Algorithm::RandomForest, train, h, seed);
  a.payload = fit_forest(make_design(train, h), params, seed);
  return a;
}

ModelArtifact fit_mlp(const fusion::FeatureTable& train, const fusion::FeatureTable& validation,
                      HorizonIndex h, const MlpParams& params, std::uint64_t seed) {
  if (train.size() < 2) throw std::invalid_argument("mlp needs at least 2 training rows");
  ModelArtifact a = base_artifact(Algorithm::Mlp, train, h, seed);
  const Design d = make_design(train, h);
  MlpModel m{params, {}, Standardizer::fit(d), target_scale(d.y)};

  const auto x_train = standardized_rows(train, m.standardizer);
  const auto y_train = scaled_targets(train, h, m.target_scale);
  const bool has_val = validation.size() > 0;
  const auto& val_table = has_val ? validation : train;
  std::vector<std::size_t> all(val_table.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Tensor x_val = gather_rows(standardized_rows(val_table, m.standardizer), all);
  const auto y_val = scaled_targets(val_table, h, m.target_scale);

  std::mt19937_64 init_rng(derive_seed(seed, "init"));
  m.net = mlp::init(d.cols, params.hidden, init_rng);
  std::vector<double> yb;
  auto batch_loss = [&](std::span<const std::size_t> pick, numkit::Grads* g) {
    yb.resize(pick.size());
    for (std::size_t i = 0; i < pick.size(); ++i) yb[i] = y_train[pick[i]];
    return mlp::loss_and_grad(m.net, gather_rows(x_train, pick), yb, params.l2, g);
  };
  auto validate = [&] {
    return numkit::mape_loss(y_val, mlp::forward(m.net, x_val, numkit::BatchNormMode::Infer));
  };
  a.info.epochs_run = train_loop(m.net, x_train.size(), params.batch_size, 2, params.max_epochs,
                                 params.patience, params.adam, derive_seed(seed, "shuffle"),
                                 batch_loss, validate, a.info.best_validation_mape);
  if (!has_val) a.info.best_validation_mape = std::numeric_limits<double>::quiet_NaN();
  a.payload = std::move(m);
  return a;
}

ModelArtifact fit_lstm(const fusion::FeatureTable& train, const fusion::FeatureTable& validation,
                       HorizonIndex h, const LstmParams& params, std::uint64_t seed) {
  const auto ends = fusion::window_ends(train, params.lookback);
  if (ends.empty()) {
    throw std::invalid_argument(
        fmt::format("no training row has {} consecutive in-window rows", params.lookback));
  }
  ModelArtifact a = base_artifact(Algorithm::Lstm, train, h, seed);
  const Design d = make_design(train, h);
  LstmModel m{params, {}, Standardizer::fit(d), target_scale(d.y)};

  const auto x_train = standardized_rows(train, m.standardizer);
  const auto y_all = scaled_targets(train, h, m.target_scale);
  std::vector<double> y_train;
  for (auto e : ends) y_train.push_back(y_all[e]);

  auto val_ends = fusion::window_ends(validation, params.lookback);
  const bool has_val = !val_ends.empty();
  const auto& val_table = has_val ? validation : train;
  if (!has_val) val_ends = ends;
  const auto x_val_rows = standardized_rows(val_table, m.standardizer);
  const auto y_val_all = scaled_targets(val_table, h, m.target_scale);
  const auto val_seq = gather_windows(x_val_rows, val_ends, params.lookback);
  std::vector<double> y_val;
  for (auto e : val_ends) y_val.push_back(y_val_all[e]);

  std::mt19937_64 init_rng(derive_seed(seed, "init"));
  m.net = lstm::init(d.cols, params.hidden, params.dense, init_rng);
  std::vector<std::size_t> pick_ends;
  std::vector<double> yb;
  auto batch_loss = [&](std::span<const std::size_t> pick, numkit::Grads* g) {
    pick_ends.resize(pick.size());
    yb.resize(pick.size());
    for (std::size_t i = 0; i < pick.size(); ++i) {
      pick_ends[i] = ends[pick[i]];
      yb[i] = y_train[pick[i]];
    }
    return lstm::loss_and_grad(m.net, gather_windows(x_train, pick_ends, params.lookback), yb,
                               params.l2, g);
  };
  auto validate = [&] { return numkit::mape_loss(y_val, lstm::forward(m.net, val_seq)); };
  a.info.epochs_run = train_loop(m.net, ends.size(), params.batch_size, 1, params.max_epochs,
                                 params.patience, params.adam, derive_seed(seed, "shuffle"),
                                 batch_loss, validate, a.info.best_validation_mape);
  if (!has_val) a.info.best_validation_mape = std::numeric_limits<double>::quiet_NaN();
  a.payload = std::move(m);
  return a;
}

ModelArtifact train_model(Algorithm algo, const fusion::FeatureTable& train,
                          const fusion::FeatureTable& validation, HorizonIndex h,
                          const TrainSettings& settings, std::uint64_t seed) {
  if (train.size() == 0) throw std::invalid_argument("training table is empty");
  if (validation.size() > 0 && validation.schema_hash() != train.schema_hash()) {
    throw SchemaMismatch("validation table schema differs from training table");
  }
  switch (algo) {
    case Algorithm::Persistence: return fit_persistence(train, h);
    case Algorithm::RandomForest: return fit_forest(train, h, settings.forest, seed);
    case Algorithm::Mlp: return fit_mlp(train, validation, h, settings.mlp, seed);
    case Algorithm::Lstm: return fit_lstm(train, validation, h, settings.lstm, seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

void require_compatible(const ModelArtifact& a, const fusion::FeatureTable& table) {
  if (a.schema_hash != table.schema_hash()) {
    throw SchemaMismatch(fmt::format("schema hash mismatch: artifact {} vs table {}",
                                     a.schema_hash, table.schema_hash()));
  }
  if (a.target_kind != table.target_kind()) {
    throw SchemaMismatch(fmt::format("target kind mismatch: artifact {} vs table {}",
                                     to_string(a.target_kind), to_string(table.target_kind())));
  }
}

std::vector<std::optional<double>> predict(const ModelArtifact& a,
                                           const fusion::FeatureTable& table) {
  require_compatible(a, table);
  std::vector<std::optional<double>> out(table.size());
  const auto& rows = table.rows();
  switch (a.algorithm) {
    case Algorithm::Persistence:
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i] = persistence_predict(table, rows[i], a.horizon);
      }
      break;
    case Algorithm::RandomForest: {
      const auto& forest = std::get<Forest>(a.payload);
      for (std::size_t i = 0; i < rows.size(); ++i) out[i] = forest.predict(table.features(rows[i]));
      break;
    }
    case Algorithm::Mlp: {
      const auto& m = std::get<MlpModel>(a.payload);
      if (rows.empty()) break;
      numkit::ParamSet net = m.net;
      std::vector<std::size_t> all(rows.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      const auto y = mlp::forward(net, gather_rows(standardized_rows(table, m.standardizer), all),
                                  numkit::BatchNormMode::Infer);
      for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[i] * m.target_scale;
      break;
    }
    case Algorithm::Lstm: {
      const auto& m = std::get<LstmModel>(a.payload);
      const auto ends = fusion::window_ends(table, m.params.lookback);
      const auto x = standardized_rows(table, m.standardizer);
      constexpr std::size_t kChunk = 512;
      for (std::size_t s = 0; s < ends.size(); s += kChunk) {
        const std::span<const std::size_t> chunk(ends.data() + s, std::min(kChunk, ends.size() - s));
        const auto y = lstm::forward(m.net, gather_windows(x, chunk, m.params.lookback));
        for (std::size_t i = 0; i < chunk.size(); ++i) out[chunk[i]] = y[i] * m.target_scale;
      }
      break;
    }
  }
  return out;
}

}  // namespace tollcast::models
