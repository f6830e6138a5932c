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


// Accuracy and proper scoring rules over prediction matrices ({n, C}, one
// predictive distribution per row), plus mean / sample-std aggregation.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "softev/data.hpp"
#include "softev/tensor.hpp"

namespace softev {

inline constexpr double kProbabilityFloor = 1e-12;

// Mean of -log max(p(y_i), 1e-12).
double nll(const Tensor& preds, std::span<const std::size_t> eval_labels);

// Mean over items of (1/C) sum_c (R(c) - J(c))^2.
double brier(const Tensor& preds, const Tensor& soft_targets);

// Fraction of rows whose argmax (ties to the lowest index) equals the label.
double accuracy(const Tensor& preds, std::span<const std::size_t> eval_labels);
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> eval_labels);

// Which label nll/accuracy score against.
enum class EvalLabelConvention {
  true_label,  // dataset truth, falling back to argmax R when absent
  argmax,      // always argmax R
};

std::string to_string(EvalLabelConvention c);
EvalLabelConvention eval_label_convention_from_string(const std::string& s);

std::vector<std::size_t> evaluation_labels(const SoftLabeledDataset& ds, EvalLabelConvention convention);
// Convention actually applied to `ds` ("true_label" or "argmax").
std::string applied_convention(const SoftLabeledDataset& ds, EvalLabelConvention convention);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single repeat
  std::vector<double> per_repeat;
};

MetricSummary summarize(std::span<const double> values);

struct RepeatMetrics {
  double accuracy = 0.0;
  double nll = 0.0;
  double brier = 0.0;
};

struct MetricsReport {
  MetricSummary accuracy;
  MetricSummary nll;
  MetricSummary brier;
  std::size_t repeats = 0;
  std::size_t classes = 0;
};

MetricsReport aggregate(std::span<const RepeatMetrics> repeats, std::size_t classes);

}  // namespace softev
