#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tollcast/numkit/params.hpp"
#include "tollcast/numkit/tensor.hpp"

namespace tollcast::numkit {

double elu(double x, double alpha = 1.0);
/// Derivative of elu at x.
double d_elu(double x, double alpha = 1.0);

double sigmoid(double x);

/// Y = X W (+ b) for X (n x in), W (in x out), b (out) or empty.
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor* b);

struct DenseGrads {
  Tensor dx;
  Tensor dw;
  Tensor db;  // empty when the layer has no bias
};

DenseGrads dense_backward(const Tensor& x, const Tensor& w, bool has_bias, const Tensor& dy);

/// Elementwise ELU of a tensor.
Tensor elu(const Tensor& x);
/// dY * elu'(pre) elementwise, where pre is the ELU input.
Tensor elu_backward(const Tensor& pre, const Tensor& dy);

enum class BatchNormMode { Train, Infer };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormCache {
  Tensor x_hat;
  std::vector<double> inv_std;
};

/// Train mode normalizes by batch statistics and folds them into the running
/// statistics as running = momentum * running + (1 - momentum) * batch.
/// Infer mode uses the running statistics only. Train mode needs n >= 2.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         BatchNormMode mode, Tensor& running_mean, Tensor& running_var,
                         double momentum = kBatchNormMomentum, BatchNormCache* cache = nullptr);

struct BatchNormGrads {
  Tensor dx;
  Tensor dgamma;
  Tensor dbeta;
};

/// Backward pass of a Train-mode forward.
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                  const Tensor& dy);

/// Mean of |y - yhat| / |y|. Throws on empty or mismatched input and on y = 0.
double mape_loss(std::span<const double> y, std::span<const double> yhat);
/// d loss / d yhat, with subgradient 0 where yhat = y.
std::vector<double> mape_grad(std::span<const double> y, std::span<const double> yhat);

/// lambda * sum of squared weight-matrix entries.
double l2_penalty(const ParamSet& params, double lambda);
/// Adds 2 * lambda * w into the weight gradients.
void add_l2_grad(const ParamSet& params, double lambda, Grads& grads);

}  // namespace tollcast::numkit
