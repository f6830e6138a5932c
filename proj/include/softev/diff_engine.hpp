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


// Dense rectifier networks with hand-derived reverse-mode gradients.
//
// Parameters of affine layer l are named "W<l>" (shape {out, in}) and "b<l>"
// (shape {out}). Every layer but the last is followed by max(0, .).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "softev/tensor.hpp"

namespace softev {

class Architecture {
 public:
  Architecture() = default;
  // Layer widths from input to output, e.g. {8, 32, 4}. Needs at least two
  // entries, all positive.
  explicit Architecture(std::vector<std::size_t> widths);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  std::size_t affine_layers() const { return widths_.size() - 1; }

  // Deterministic list of (name, shape) pairs in parameter order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout() const;
  std::size_t parameter_count() const;

  bool operator==(const Architecture&) const = default;

 private:
  std::vector<std::size_t> widths_;
};

std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);

// Zero-filled parameters matching `arch`.
ParameterSet zero_parameters(const Architecture& arch);

// Throws ShapeError unless params has exactly the names and shapes of `arch`.
void check_parameters(const ParameterSet& params, const Architecture& arch);

// Activations saved by the forward pass: inputs[l] is the {batch, in} input
// of affine layer l.
struct ForwardTrace {
  std::vector<Tensor> inputs;
};

// x has shape {d} or {batch, d}; the result has shape {C} or {batch, C}.
Tensor mlp_forward(const ParameterSet& params, const Tensor& x, const Architecture& arch,
                   ForwardTrace* trace = nullptr);

// Gradient of sum_{b,c} dlogits(b,c) * logits(b,c) with respect to every
// parameter, given the trace of the forward pass that produced the logits.
GradientSet mlp_backward(const ParameterSet& params, const Architecture& arch, const ForwardTrace& trace,
                         const Tensor& dlogits);

std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);

struct LossWithGradient {
  double value = 0.0;
  std::vector<double> grad;  // d value / d logits
};

// -sum_c target_c log softmax(logits)_c, gradient softmax(logits) - target.
LossWithGradient soft_cross_entropy(std::span<const double> logits, std::span<const double> target);

// Log density of Normal(mean, sd) at w. DomainError if sd <= 0.
double gaussian_log_pdf(double w, double mean, double sd);

// Momentum SGD: state <- momentum * state + grads; params <- params - lr * state.
void sgd_step(ParameterSet& params, const GradientSet& grads, double lr, double momentum, GradientSet& state);

}  // namespace softev
