#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tollcast/core/hyperparams.hpp"
#include "tollcast/numkit/ops.hpp"
#include "tollcast/numkit/params.hpp"

namespace tollcast::models::mlp {

/// Four blocks of Dense (no bias) -> BatchNorm -> ELU, then a linear Dense to
/// one output. The batch-norm shift stands in for the dense bias.
numkit::ParamSet init(std::size_t inputs, const std::array<int, 4>& hidden, std::mt19937_64& rng);

/// Network output per row of x. Train mode uses batch statistics and updates
/// the running statistics held in `net`.
std::vector<double> forward(numkit::ParamSet& net, const numkit::Tensor& x,
                            numkit::BatchNormMode mode);

/// MAPE(y, net(x)) + l2 penalty, batch norm in Train mode. Fills grads when
/// non-null.
double loss_and_grad(numkit::ParamSet& net, const numkit::Tensor& x, std::span<const double> y,
                     double l2, numkit::Grads* grads);

}  // namespace tollcast::models::mlp
