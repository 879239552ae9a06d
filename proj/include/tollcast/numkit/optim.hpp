#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "tollcast/core/hyperparams.hpp"
#include "tollcast/numkit/params.hpp"

namespace tollcast::numkit {

struct AdamState {
  AdamSettings settings;
  Grads m;
  Grads v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const ParamSet& params, AdamSettings s);
};

/// One bias-corrected Adam update of every trainable parameter. Throws
/// NumericalError naming the parameter when a gradient is not finite.
void adam_step(ParamSet& params, const Grads& grads, AdamState& state);

/// Loss at the current parameters; fills grads when non-null.
using LossFn = std::function<double(ParamSet&, Grads*)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t probes = 0;
  /// Probes redrawn because the loss looked non-differentiable there.
  std::size_t resampled = 0;
};

inline constexpr double kGradCheckStep = 1e-5;

/// Compares analytic gradients with central differences at `probes` random
/// trainable coordinates. Relative error is |ga - gfd| / max(|ga|, |gfd|, 1e-8).
/// A failing coordinate whose one-sided differences disagree (a kink such as
/// the MAPE cusp at yhat = y) is redrawn, at most `probes` times in total.
GradCheckResult grad_check(const LossFn& loss, ParamSet& params, std::size_t probes,
                           std::uint64_t seed);

}  // namespace tollcast::numkit
