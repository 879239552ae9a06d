#include "tollcast/numkit/optim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include <fmt/core.h>

namespace tollcast::numkit {

AdamState::AdamState(const ParamSet& params, AdamSettings s)
    : settings(s), m(params.zero_grads()), v(params.zero_grads()) {}

void adam_step(ParamSet& params, const Grads& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam: gradient/state count does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable()) continue;
    if (grads[i].shape() != params.value(i).shape()) {
      throw std::invalid_argument(fmt::format("adam: gradient shape mismatch for '{}'", params[i].name));
    }
    if (!grads[i].all_finite()) {
      throw NumericalError(fmt::format("non-finite gradient for parameter '{}'", params[i].name));
    }
  }
  const auto& s = state.settings;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable()) continue;
    Tensor& w = params.value(i);
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * g[k];
      v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
  }
}

GradCheckResult grad_check(const LossFn& loss, ParamSet& params, std::size_t probes,
                           std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable()) continue;
    for (std::size_t k = 0; k < params.value(i).size(); ++k) coords.emplace_back(i, k);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);

  Grads analytic = params.zero_grads();
  const double f0 = loss(params, &analytic);

  GradCheckResult result;
  std::size_t next = 0;
  const double h = kGradCheckStep;
  while (result.probes < probes && next < coords.size()) {
    const auto [i, k] = coords[next++];
    double& w = params.value(i)[k];
    const double orig = w;
    w = orig + h;
    const double f_plus = loss(params, nullptr);
    w = orig - h;
    const double f_minus = loss(params, nullptr);
    w = orig;

    const double ga = analytic[i][k];
    const double gfd = (f_plus - f_minus) / (2.0 * h);
    const double rel =
        std::abs(ga - gfd) / std::max({std::abs(ga), std::abs(gfd), 1e-8});
    if (rel > 1e-4 && result.resampled < probes) {
      const double forward = (f_plus - f0) / h;
      const double backward = (f0 - f_minus) / h;
      if (std::abs(forward - backward) > std::abs(ga - gfd)) {
        ++result.resampled;
        continue;
      }
    }
    ++result.probes;
    if (rel > result.max_relative_error || result.worst_param.empty()) {
      result.max_relative_error = std::max(rel, result.max_relative_error);
      result.worst_param = fmt::format("{}[{}]", params[i].name, k);
    }
  }
  return result;
}

}  // namespace tollcast::numkit
