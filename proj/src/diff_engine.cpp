// Copyright 2026 The softev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "softev/diff_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace softev {

Architecture::Architecture(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ShapeError("architecture needs an input and an output width");
  for (std::size_t w : widths_)
    if (w == 0) throw ShapeError("architecture widths must be positive");
}

std::string weight_name(std::size_t layer) { return "W" + std::to_string(layer); }
std::string bias_name(std::size_t layer) { return "b" + std::to_string(layer); }

std::vector<std::pair<std::string, std::vector<std::size_t>>> Architecture::parameter_layout() const {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  for (std::size_t l = 0; l < affine_layers(); ++l) {
    out.emplace_back(weight_name(l), std::vector<std::size_t>{widths_[l + 1], widths_[l]});
    out.emplace_back(bias_name(l), std::vector<std::size_t>{widths_[l + 1]});
  }
  return out;
}

std::size_t Architecture::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, shape] : parameter_layout()) n += shape_product(shape);
  return n;
}

ParameterSet zero_parameters(const Architecture& arch) {
  ParameterSet p;
  for (auto& [name, shape] : arch.parameter_layout()) p.add(name, Tensor(shape));
  return p;
}

void check_parameters(const ParameterSet& params, const Architecture& arch) {
  const auto layout = arch.parameter_layout();
  if (params.size() != layout.size())
    throw ShapeError("parameter set has " + std::to_string(params.size()) + " tensors, architecture needs " +
                     std::to_string(layout.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params[i].name != layout[i].first || params[i].value.shape() != layout[i].second)
      throw ShapeError("parameter '" + params[i].name + "' " + shape_string(params[i].value.shape()) +
                       " does not match expected '" + layout[i].first + "' " + shape_string(layout[i].second));
  }
}

Tensor mlp_forward(const ParameterSet& params, const Tensor& x, const Architecture& arch, ForwardTrace* trace) {
  check_parameters(params, arch);
  const bool single = x.rank() == 1;
  if (!(single || x.rank() == 2)) throw ShapeError("mlp input must be a vector or a matrix");
  const std::size_t batch = single ? 1 : x.shape()[0];
  const std::size_t dim = single ? x.shape()[0] : x.shape()[1];
  if (dim != arch.input_dim())
    throw ShapeError("input width " + std::to_string(dim) + " does not match architecture input " +
                     std::to_string(arch.input_dim()));
  for (double v : x.values())
    if (!std::isfinite(v)) throw NumericError("non-finite network input");

  Tensor h({batch, dim}, std::vector<double>(x.values().begin(), x.values().end()));
  if (trace) trace->inputs.clear();
  for (std::size_t l = 0; l < arch.affine_layers(); ++l) {
    const Tensor& W = params[2 * l].value;
    const Tensor& b = params[2 * l + 1].value;
    const std::size_t in = W.shape()[1], out = W.shape()[0];
    Tensor z = Tensor::matrix(batch, out);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto hin = h.row(r);
      auto zr = z.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        const double* w = &W(o, 0);
        for (std::size_t i = 0; i < in; ++i) acc += w[i] * hin[i];
        zr[o] = acc;
      }
    }
    const bool hidden = l + 1 < arch.affine_layers();
    if (hidden)
      for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
    if (trace) trace->inputs.push_back(std::move(h));
    h = std::move(z);
  }
  if (single) return Tensor({arch.output_dim()}, std::vector<double>(h.values().begin(), h.values().end()));
  return h;
}

GradientSet mlp_backward(const ParameterSet& params, const Architecture& arch, const ForwardTrace& trace,
                         const Tensor& dlogits) {
  check_parameters(params, arch);
  if (trace.inputs.size() != arch.affine_layers()) throw ShapeError("forward trace does not match architecture");
  const std::size_t batch = trace.inputs.front().rows();
  if (dlogits.size() != batch * arch.output_dim()) throw ShapeError("dlogits does not match the traced batch");

  GradientSet grads = GradientSet::like(params);
  Tensor delta({batch, arch.output_dim()}, std::vector<double>(dlogits.values().begin(), dlogits.values().end()));
  for (std::size_t l = arch.affine_layers(); l-- > 0;) {
    const Tensor& W = params[2 * l].value;
    const Tensor& input = trace.inputs[l];
    Tensor& gW = grads[2 * l].value;
    Tensor& gb = grads[2 * l + 1].value;
    const std::size_t in = W.shape()[1], out = W.shape()[0];
    for (std::size_t r = 0; r < batch; ++r) {
      const auto d = delta.row(r);
      const auto a = input.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        if (d[o] == 0.0) continue;
        gb[o] += d[o];
        double* g = &gW(o, 0);
        for (std::size_t i = 0; i < in; ++i) g[i] += d[o] * a[i];
      }
    }
    if (l == 0) break;
    // Propagate through W and the rectifier that produced `input`; the
    // rectifier's derivative at 0 is taken as 0.
    Tensor next = Tensor::matrix(batch, in);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto d = delta.row(r);
      const auto a = input.row(r);
      auto nr = next.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        if (d[o] == 0.0) continue;
        const double* w = &W(o, 0);
        for (std::size_t i = 0; i < in; ++i) nr[i] += d[o] * w[i];
      }
      for (std::size_t i = 0; i < in; ++i)
        if (a[i] <= 0.0) nr[i] = 0.0;
    }
    delta = std::move(next);
  }
  return grads;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("log_softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

LossWithGradient soft_cross_entropy(std::span<const double> logits, std::span<const double> target) {
  if (logits.size() != target.size())
    throw ShapeError("soft_cross_entropy: " + std::to_string(logits.size()) + " logits vs " +
                     std::to_string(target.size()) + " target entries");
  for (double v : logits)
    if (!std::isfinite(v)) throw NumericError("soft_cross_entropy: non-finite logit");
  const auto logp = log_softmax(logits);
  LossWithGradient out;
  out.grad.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (target[c] != 0.0) out.value -= target[c] * logp[c];
    out.grad[c] = std::exp(logp[c]) - target[c];
  }
  return out;
}

double gaussian_log_pdf(double w, double mean, double sd) {
  if (!(sd > 0.0)) throw DomainError("gaussian_log_pdf: sd must be positive");
  const double z = (w - mean) / sd;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * z * z;
}

void sgd_step(ParameterSet& params, const GradientSet& grads, double lr, double momentum, GradientSet& state) {
  if (!(lr > 0.0)) throw DomainError("sgd_step: learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("sgd_step: momentum must lie in [0, 1)");
  if (!params.same_layout(grads) || !params.same_layout(state))
    throw ShapeError("sgd_step: parameters, gradients and state disagree on names or shapes");
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t].value.values();
    auto g = grads[t].value.values();
    auto v = state[t].value.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      p[i] -= lr * v[i];
    }
  }
}

}  // namespace softev
