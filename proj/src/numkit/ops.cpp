#include "tollcast/numkit/ops.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace tollcast::numkit {

double elu(double x, double alpha) { return x > 0.0 ? x : alpha * std::expm1(x); }

double d_elu(double x, double alpha) { return x > 0.0 ? 1.0 : alpha * std::exp(x); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor* b) {
  Tensor y = matmul(x, w);
  if (b != nullptr && b->size() > 0) {
    const std::size_t n = y.rows(), m = y.cols();
    if (b->size() != m) throw std::invalid_argument("dense bias width mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) y.at(i, j) += (*b)[j];
    }
  }
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& w, bool has_bias, const Tensor& dy) {
  DenseGrads g;
  g.dw = matmul_tn(x, dy);
  g.dx = matmul_nt(dy, w);
  if (has_bias) {
    g.db = Tensor::vector(dy.cols());
    for (std::size_t i = 0; i < dy.rows(); ++i) {
      for (std::size_t j = 0; j < dy.cols(); ++j) g.db[j] += dy.at(i, j);
    }
  }
  return g;
}

Tensor elu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = elu(v);
  return y;
}

Tensor elu_backward(const Tensor& pre, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= d_elu(pre[i]);
  return dx;
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         BatchNormMode mode, Tensor& running_mean, Tensor& running_var,
                         double momentum, BatchNormCache* cache) {
  const std::size_t n = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d || running_mean.size() != d ||
      running_var.size() != d) {
    throw std::invalid_argument("batch norm parameter width mismatch");
  }
  Tensor y = Tensor::matrix(n, d);
  if (mode == BatchNormMode::Infer) {
    for (std::size_t j = 0; j < d; ++j) {
      const double inv = 1.0 / std::sqrt(running_var[j] + kBatchNormEpsilon);
      for (std::size_t i = 0; i < n; ++i) {
        y.at(i, j) = gamma[j] * (x.at(i, j) - running_mean[j]) * inv + beta[j];
      }
    }
    return y;
  }
  if (n < 2) throw std::invalid_argument(fmt::format("batch norm needs >= 2 rows, got {}", n));
  Tensor x_hat = Tensor::matrix(n, d);
  std::vector<double> inv_std(d);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x.at(i, j);
    mean /= dn;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = x.at(i, j) - mean;
      var += c * c;
    }
    var /= dn;
    inv_std[j] = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    for (std::size_t i = 0; i < n; ++i) {
      x_hat.at(i, j) = (x.at(i, j) - mean) * inv_std[j];
      y.at(i, j) = gamma[j] * x_hat.at(i, j) + beta[j];
    }
    running_mean[j] = momentum * running_mean[j] + (1.0 - momentum) * mean;
    running_var[j] = momentum * running_var[j] + (1.0 - momentum) * var;
  }
  if (cache != nullptr) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                  const Tensor& dy) {
  const std::size_t n = dy.rows(), d = dy.cols();
  const double dn = static_cast<double>(n);
  BatchNormGrads g{Tensor::matrix(n, d), Tensor::vector(d), Tensor::vector(d)};
  for (std::size_t j = 0; j < d; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_dy += dy.at(i, j);
      sum_dy_xhat += dy.at(i, j) * cache.x_hat.at(i, j);
    }
    g.dbeta[j] = sum_dy;
    g.dgamma[j] = sum_dy_xhat;
    const double k = gamma[j] * cache.inv_std[j] / dn;
    for (std::size_t i = 0; i < n; ++i) {
      g.dx.at(i, j) = k * (dn * dy.at(i, j) - sum_dy - cache.x_hat.at(i, j) * sum_dy_xhat);
    }
  }
  return g;
}

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty()) throw std::invalid_argument("mape of empty vectors");
  if (y.size() != yhat.size()) throw std::invalid_argument("mape length mismatch");
}

}  // namespace

double mape_loss(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) throw std::invalid_argument("mape undefined at y = 0");
    s += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
  }
  return s / static_cast<double>(y.size());
}

std::vector<double> mape_grad(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  const double n = static_cast<double>(y.size());
  std::vector<double> g(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) throw std::invalid_argument("mape undefined at y = 0");
    const double diff = yhat[i] - y[i];
    if (diff > 0.0) g[i] = 1.0 / (std::abs(y[i]) * n);
    if (diff < 0.0) g[i] = -1.0 / (std::abs(y[i]) * n);
  }
  return g;
}

double l2_penalty(const ParamSet& params, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("l2 lambda must be >= 0");
  double s = 0.0;
  for (const auto& p : params.params()) {
    if (!p.decays()) continue;
    for (double w : p.value.values()) s += w * w;
  }
  return lambda * s;
}

void add_l2_grad(const ParamSet& params, double lambda, Grads& grads) {
  if (lambda == 0.0) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].decays()) continue;
    const auto& w = params.value(i);
    for (std::size_t k = 0; k < w.size(); ++k) grads[i][k] += 2.0 * lambda * w[k];
  }
}

}  // namespace tollcast::numkit
