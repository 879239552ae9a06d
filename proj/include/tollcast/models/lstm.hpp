#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tollcast/numkit/params.hpp"
#include "tollcast/numkit/tensor.hpp"

namespace tollcast::models::lstm {

/// One LSTM layer (gates i, f, g, o; sigmoid gates, tanh candidate and output
/// squash) whose final hidden state feeds three Dense+ELU layers and a linear
/// output. The forget-gate bias starts at 1.
numkit::ParamSet init(std::size_t inputs, int hidden, const std::array<int, 3>& dense,
                      std::mt19937_64& rng);

/// A batch of sequences: steps[t] is (batch x inputs) for step t, oldest first.
using Sequence = std::vector<numkit::Tensor>;

/// Extremes seen during a forward pass.
struct Trace {
  double gate_min = 1.0;
  double gate_max = 0.0;
  double hidden_min = 0.0;
  double hidden_max = 0.0;
};

std::vector<double> forward(const numkit::ParamSet& net, const Sequence& steps,
                            Trace* trace = nullptr);

/// MAPE(y, net(steps)) + l2 penalty with backpropagation through every step.
double loss_and_grad(const numkit::ParamSet& net, const Sequence& steps, std::span<const double> y,
                     double l2, numkit::Grads* grads);

}  // namespace tollcast::models::lstm
