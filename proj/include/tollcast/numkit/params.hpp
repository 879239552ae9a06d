#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tollcast/numkit/tensor.hpp"

namespace tollcast::numkit {

enum class ParamRole { Weight, Bias, Scale, Shift, RunningMean, RunningVar };

struct Param {
  std::string name;
  ParamRole role;
  Tensor value;

  /// Updated by the optimizer. Running statistics are not.
  bool trainable() const { return role != ParamRole::RunningMean && role != ParamRole::RunningVar; }
  /// Subject to L2 decay: weight matrices only.
  bool decays() const { return role == ParamRole::Weight; }
};

/// Named parameters in insertion order. Names are unique and shapes are fixed
/// once added.
class ParamSet {
 public:
  std::size_t add(std::string name, ParamRole role, Tensor value);

  std::size_t size() const { return params_.size(); }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Tensor& value(std::size_t i) { return params_[i].value; }
  const Tensor& value(std::size_t i) const { return params_[i].value; }
  std::optional<std::size_t> find(const std::string& name) const;
  const std::vector<Param>& params() const { return params_; }

  /// Total scalar count over trainable parameters.
  std::size_t trainable_scalars() const;
  /// One zero tensor per parameter, shaped like it.
  std::vector<Tensor> zero_grads() const;

  bool operator==(const ParamSet&) const;

 private:
  std::vector<Param> params_;
};

using Grads = std::vector<Tensor>;

/// He-style uniform initialization: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
Tensor he_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

}  // namespace tollcast::numkit
