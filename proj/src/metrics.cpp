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


#include "softev/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "softev/error.hpp"

namespace softev {

namespace {

void check_rows(const Tensor& preds, std::size_t n, const char* what) {
  if (preds.rank() != 2) throw UsageError(std::string(what) + ": predictions must be a matrix");
  if (preds.rows() != n)
    throw UsageError(std::string(what) + ": " + std::to_string(preds.rows()) + " predictions for " +
                     std::to_string(n) + " items");
}

}  // namespace

double nll(const Tensor& preds, std::span<const std::size_t> eval_labels) {
  check_rows(preds, eval_labels.size(), "nll");
  if (eval_labels.empty()) throw UsageError("nll: no items");
  double s = 0.0;
  for (std::size_t r = 0; r < eval_labels.size(); ++r) {
    if (eval_labels[r] >= preds.cols()) throw UsageError("nll: label out of range");
    s -= std::log(std::max(preds(r, eval_labels[r]), kProbabilityFloor));
  }
  return s / static_cast<double>(eval_labels.size());
}

double brier(const Tensor& preds, const Tensor& soft_targets) {
  if (soft_targets.rank() != 2) throw UsageError("brier: targets must be a matrix");
  check_rows(preds, soft_targets.rows(), "brier");
  if (preds.cols() != soft_targets.cols()) throw UsageError("brier: class counts differ");
  if (preds.rows() == 0) throw UsageError("brier: no items");
  const std::size_t c = preds.cols();
  double s = 0.0;
  for (std::size_t r = 0; r < preds.rows(); ++r) {
    double item = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = soft_targets(r, k) - preds(r, k);
      item += d * d;
    }
    s += item / static_cast<double>(c);
  }
  return s / static_cast<double>(preds.rows());
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> eval_labels) {
  if (predicted.size() != eval_labels.size())
    throw UsageError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(eval_labels.size()) + " items");
  if (predicted.empty()) throw UsageError("accuracy: no items");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == eval_labels[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double accuracy(const Tensor& preds, std::span<const std::size_t> eval_labels) {
  check_rows(preds, eval_labels.size(), "accuracy");
  std::vector<std::size_t> predicted(preds.rows());
  for (std::size_t r = 0; r < preds.rows(); ++r) predicted[r] = argmax(preds.row(r));
  return accuracy(predicted, eval_labels);
}

std::string to_string(EvalLabelConvention c) { return c == EvalLabelConvention::true_label ? "true_label" : "argmax"; }

EvalLabelConvention eval_label_convention_from_string(const std::string& s) {
  if (s == "true_label") return EvalLabelConvention::true_label;
  if (s == "argmax") return EvalLabelConvention::argmax;
  throw UsageError("unknown evaluation-label convention '" + s + "'");
}

std::vector<std::size_t> evaluation_labels(const SoftLabeledDataset& ds, EvalLabelConvention convention) {
  if (convention == EvalLabelConvention::true_label && ds.true_labels) return *ds.true_labels;
  std::vector<std::size_t> out(ds.rows());
  for (std::size_t r = 0; r < ds.rows(); ++r) out[r] = argmax(ds.soft_labels.row(r));
  return out;
}

std::string applied_convention(const SoftLabeledDataset& ds, EvalLabelConvention convention) {
  return convention == EvalLabelConvention::true_label && ds.true_labels ? "true_label" : "argmax";
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw UsageError("cannot summarize zero repeats");
  MetricSummary s;
  s.per_repeat.assign(values.begin(), values.end());
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    return s;
  }
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

MetricsReport aggregate(std::span<const RepeatMetrics> repeats, std::size_t classes) {
  if (repeats.empty()) throw UsageError("aggregate needs at least one repeat");
  std::vector<double> acc, nl, br;
  for (const auto& r : repeats) {
    acc.push_back(r.accuracy);
    nl.push_back(r.nll);
    br.push_back(r.brier);
  }
  return {summarize(acc), summarize(nl), summarize(br), repeats.size(), classes};
}

}  // namespace softev
