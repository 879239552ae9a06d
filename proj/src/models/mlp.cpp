#include "tollcast/models/mlp.hpp"

#include <fmt/core.h>

namespace tollcast::models::mlp {

using numkit::BatchNormMode;
using numkit::ParamRole;
using numkit::Tensor;

namespace {

constexpr std::size_t kBlocks = 4;
constexpr std::size_t kPerBlock = 5;  // w, gamma, beta, mean, var
constexpr std::size_t kOutW = kBlocks * kPerBlock;
constexpr std::size_t kOutB = kOutW + 1;

struct BlockCache {
  Tensor input;
  numkit::BatchNormCache bn;
  Tensor pre_act;
};

Tensor run(numkit::ParamSet& net, const Tensor& x, BatchNormMode mode,
           std::vector<BlockCache>* caches) {
  Tensor a = x;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    const std::size_t base = k * kPerBlock;
    Tensor z = numkit::dense_forward(a, net.value(base), nullptr);
    numkit::BatchNormCache bn;
    Tensor u = numkit::batchnorm_forward(z, net.value(base + 1), net.value(base + 2), mode,
                                         net.value(base + 3), net.value(base + 4),
                                         numkit::kBatchNormMomentum, caches ? &bn : nullptr);
    Tensor next = numkit::elu(u);
    if (caches != nullptr) caches->push_back({std::move(a), std::move(bn), std::move(u)});
    a = std::move(next);
  }
  if (caches != nullptr) caches->push_back({a, {}, {}});
  return numkit::dense_forward(a, net.value(kOutW), &net.value(kOutB));
}

}  // namespace

numkit::ParamSet init(std::size_t inputs, const std::array<int, 4>& hidden, std::mt19937_64& rng) {
  numkit::ParamSet net;
  std::size_t fan_in = inputs;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    const auto width = static_cast<std::size_t>(hidden[k]);
    net.add(fmt::format("dense{}.w", k), ParamRole::Weight, numkit::he_uniform(fan_in, width, rng));
    net.add(fmt::format("bn{}.gamma", k), ParamRole::Scale, Tensor::vector(width, 1.0));
    net.add(fmt::format("bn{}.beta", k), ParamRole::Shift, Tensor::vector(width, 0.0));
    net.add(fmt::format("bn{}.mean", k), ParamRole::RunningMean, Tensor::vector(width, 0.0));
    net.add(fmt::format("bn{}.var", k), ParamRole::RunningVar, Tensor::vector(width, 1.0));
    fan_in = width;
  }
  net.add("out.w", ParamRole::Weight, numkit::he_uniform(fan_in, 1, rng));
  // Targets are scaled to mean magnitude 1; start the output there.
  net.add("out.b", ParamRole::Bias, Tensor::vector(1, 1.0));
  return net;
}

std::vector<double> forward(numkit::ParamSet& net, const Tensor& x, BatchNormMode mode) {
  return run(net, x, mode, nullptr).values();
}

double loss_and_grad(numkit::ParamSet& net, const Tensor& x, std::span<const double> y,
                     double l2, numkit::Grads* grads) {
  std::vector<BlockCache> caches;
  const Tensor out = run(net, x, BatchNormMode::Train, grads ? &caches : nullptr);
  const double loss = numkit::mape_loss(y, out.values()) + numkit::l2_penalty(net, l2);
  if (grads == nullptr) return loss;

  numkit::Grads& g = *grads;
  g = net.zero_grads();
  const Tensor dout({out.rows(), 1}, numkit::mape_grad(y, out.values()));
  auto og = numkit::dense_backward(caches.back().input, net.value(kOutW), true, dout);
  g[kOutW] = std::move(og.dw);
  g[kOutB] = std::move(og.db);
  Tensor da = std::move(og.dx);
  for (std::size_t k = kBlocks; k-- > 0;) {
    const std::size_t base = k * kPerBlock;
    const auto& c = caches[k];
    const Tensor du = numkit::elu_backward(c.pre_act, da);
    auto bg = numkit::batchnorm_backward(c.bn, net.value(base + 1), du);
    g[base + 1] = std::move(bg.dgamma);
    g[base + 2] = std::move(bg.dbeta);
    auto dg = numkit::dense_backward(c.input, net.value(base), false, bg.dx);
    g[base] = std::move(dg.dw);
    da = std::move(dg.dx);
  }
  numkit::add_l2_grad(net, l2, g);
  return loss;
}

}  // namespace tollcast::models::mlp
