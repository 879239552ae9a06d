#include "tollcast/models/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "tollcast/numkit/ops.hpp"

namespace tollcast::models::lstm {

using numkit::ParamRole;
using numkit::Tensor;

namespace {

constexpr std::size_t kWx = 0, kWh = 1, kB = 2, kDense = 3, kDenseCount = 3;
constexpr std::size_t kOutW = kDense + 2 * kDenseCount, kOutB = kOutW + 1;

struct StepCache {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;
  Tensor gates;  // activated i, f, g, o side by side (batch x 4H)
  Tensor tanh_c;
};

struct Caches {
  std::vector<StepCache> steps;
  std::vector<Tensor> dense_in;
  std::vector<Tensor> dense_pre;
  Tensor out_in;
};

Tensor run(const numkit::ParamSet& net, const Sequence& seq, Caches* caches, Trace* trace) {
  if (seq.empty()) throw std::invalid_argument("lstm needs at least one step");
  const std::size_t batch = seq.front().rows();
  const std::size_t hsz = net.value(kWh).rows();
  Tensor h = Tensor::matrix(batch, hsz), c = Tensor::matrix(batch, hsz);
  for (const auto& x : seq) {
    if (x.rows() != batch) throw std::invalid_argument("lstm steps differ in batch size");
    Tensor z = numkit::dense_forward(x, net.value(kWx), &net.value(kB));
    const Tensor zh = numkit::matmul(h, net.value(kWh));
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += zh[k];
    Tensor c_next = Tensor::matrix(batch, hsz), h_next = Tensor::matrix(batch, hsz);
    Tensor tanh_c = Tensor::matrix(batch, hsz);
    for (std::size_t b = 0; b < batch; ++b) {
      double* zr = z.data() + b * 4 * hsz;
      for (std::size_t j = 0; j < hsz; ++j) {
        const double i = numkit::sigmoid(zr[j]);
        const double f = numkit::sigmoid(zr[hsz + j]);
        const double g = std::tanh(zr[2 * hsz + j]);
        const double o = numkit::sigmoid(zr[3 * hsz + j]);
        zr[j] = i;
        zr[hsz + j] = f;
        zr[2 * hsz + j] = g;
        zr[3 * hsz + j] = o;
        const double cn = f * c.at(b, j) + i * g;
        c_next.at(b, j) = cn;
        tanh_c.at(b, j) = std::tanh(cn);
        h_next.at(b, j) = o * tanh_c.at(b, j);
        if (trace != nullptr) {
          trace->gate_min = std::min({trace->gate_min, i, f, o});
          trace->gate_max = std::max({trace->gate_max, i, f, o});
          trace->hidden_min = std::min(trace->hidden_min, h_next.at(b, j));
          trace->hidden_max = std::max(trace->hidden_max, h_next.at(b, j));
        }
      }
    }
    if (caches != nullptr) {
      caches->steps.push_back({x, std::move(h), std::move(c), std::move(z), std::move(tanh_c)});
    }
    h = std::move(h_next);
    c = std::move(c_next);
  }
  Tensor a = std::move(h);
  for (std::size_t k = 0; k < kDenseCount; ++k) {
    Tensor pre = numkit::dense_forward(a, net.value(kDense + 2 * k), &net.value(kDense + 2 * k + 1));
    Tensor next = numkit::elu(pre);
    if (caches != nullptr) {
      caches->dense_in.push_back(std::move(a));
      caches->dense_pre.push_back(std::move(pre));
    }
    a = std::move(next);
  }
  Tensor out = numkit::dense_forward(a, net.value(kOutW), &net.value(kOutB));
  if (caches != nullptr) caches->out_in = std::move(a);
  return out;
}

}  // namespace

numkit::ParamSet init(std::size_t inputs, int hidden, const std::array<int, 3>& dense,
                      std::mt19937_64& rng) {
  const auto h = static_cast<std::size_t>(hidden);
  numkit::ParamSet net;
  net.add("lstm.wx", ParamRole::Weight, numkit::he_uniform(inputs, 4 * h, rng));
  // Recurrent weights scaled for the tanh/sigmoid regime rather than ELU.
  Tensor wh = numkit::he_uniform(h, 4 * h, rng);
  for (auto& v : wh.values()) v *= std::sqrt(0.5);
  net.add("lstm.wh", ParamRole::Weight, std::move(wh));
  Tensor b = Tensor::vector(4 * h, 0.0);
  for (std::size_t j = h; j < 2 * h; ++j) b[j] = 1.0;
  net.add("lstm.b", ParamRole::Bias, std::move(b));
  std::size_t fan_in = h;
  for (std::size_t k = 0; k < kDenseCount; ++k) {
    const auto width = static_cast<std::size_t>(dense[k]);
    net.add(fmt::format("dense{}.w", k), ParamRole::Weight, numkit::he_uniform(fan_in, width, rng));
    net.add(fmt::format("dense{}.b", k), ParamRole::Bias, Tensor::vector(width, 0.0));
    fan_in = width;
  }
  net.add("out.w", ParamRole::Weight, numkit::he_uniform(fan_in, 1, rng));
  net.add("out.b", ParamRole::Bias, Tensor::vector(1, 1.0));
  return net;
}

std::vector<double> forward(const numkit::ParamSet& net, const Sequence& steps, Trace* trace) {
  return run(net, steps, nullptr, trace).values();
}

double loss_and_grad(const numkit::ParamSet& net, const Sequence& steps, std::span<const double> y,
                     double l2, numkit::Grads* grads) {
  Caches caches;
  const Tensor out = run(net, steps, grads ? &caches : nullptr, nullptr);
  const double loss = numkit::mape_loss(y, out.values()) + numkit::l2_penalty(net, l2);
  if (grads == nullptr) return loss;

  numkit::Grads& g = *grads;
  g = net.zero_grads();
  const Tensor dout({out.rows(), 1}, numkit::mape_grad(y, out.values()));
  auto og = numkit::dense_backward(caches.out_in, net.value(kOutW), true, dout);
  g[kOutW] = std::move(og.dw);
  g[kOutB] = std::move(og.db);
  Tensor da = std::move(og.dx);
  for (std::size_t k = kDenseCount; k-- > 0;) {
    const Tensor dpre = numkit::elu_backward(caches.dense_pre[k], da);
    auto dg = numkit::dense_backward(caches.dense_in[k], net.value(kDense + 2 * k), true, dpre);
    g[kDense + 2 * k] = std::move(dg.dw);
    g[kDense + 2 * k + 1] = std::move(dg.db);
    da = std::move(dg.dx);
  }

  const std::size_t batch = da.rows(), hsz = da.cols();
  Tensor dh = std::move(da);
  Tensor dc = Tensor::matrix(batch, hsz);
  for (std::size_t t = caches.steps.size(); t-- > 0;) {
    const auto& s = caches.steps[t];
    Tensor dz = Tensor::matrix(batch, 4 * hsz);
    Tensor dc_prev = Tensor::matrix(batch, hsz);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* gr = s.gates.data() + b * 4 * hsz;
      double* dzr = dz.data() + b * 4 * hsz;
      for (std::size_t j = 0; j < hsz; ++j) {
        const double i = gr[j], f = gr[hsz + j], gg = gr[2 * hsz + j], o = gr[3 * hsz + j];
        const double tc = s.tanh_c.at(b, j);
        const double dhv = dh.at(b, j);
        const double dct = dc.at(b, j) + dhv * o * (1.0 - tc * tc);
        dzr[j] = dct * gg * i * (1.0 - i);
        dzr[hsz + j] = dct * s.c_prev.at(b, j) * f * (1.0 - f);
        dzr[2 * hsz + j] = dct * i * (1.0 - gg * gg);
        dzr[3 * hsz + j] = dhv * tc * o * (1.0 - o);
        dc_prev.at(b, j) = dct * f;
      }
    }
    const Tensor dwx = numkit::matmul_tn(s.x, dz);
    const Tensor dwh = numkit::matmul_tn(s.h_prev, dz);
    for (std::size_t k = 0; k < dwx.size(); ++k) g[kWx][k] += dwx[k];
    for (std::size_t k = 0; k < dwh.size(); ++k) g[kWh][k] += dwh[k];
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t k = 0; k < 4 * hsz; ++k) g[kB][k] += dz.at(b, k);
    }
    dh = numkit::matmul_nt(dz, net.value(kWh));
    dc = std::move(dc_prev);
  }
  numkit::add_l2_grad(net, l2, g);
  return loss;
}

}  // namespace tollcast::models::lstm
