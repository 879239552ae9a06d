#include "tollcast/numkit/params.hpp"

#include <cmath>

#include <fmt/core.h>

namespace tollcast::numkit {

std::size_t ParamSet::add(std::string name, ParamRole role, Tensor value) {
  if (find(name)) throw std::invalid_argument(fmt::format("duplicate parameter '{}'", name));
  value.require_finite(name);
  params_.push_back(Param{std::move(name), role, std::move(value)});
  return params_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::trainable_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable()) n += p.value.size();
  }
  return n;
}

Grads ParamSet::zero_grads() const {
  Grads g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.value.shape(), 0.0);
  return g;
}

bool ParamSet::operator==(const ParamSet& o) const {
  if (params_.size() != o.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = o.params_[i];
    if (a.name != b.name || a.role != b.role || !(a.value == b.value)) return false;
  }
  return true;
}

Tensor he_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-limit, limit);
  Tensor w = Tensor::matrix(fan_in, fan_out);
  for (auto& v : w.values()) v = u(rng);
  return w;
}

}  // namespace tollcast::numkit
