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


#include "softev/methods.hpp"

#include <algorithm>
#include <numeric>

namespace softev {

namespace {

template <class Fn>
auto annotate_member(std::size_t k, Fn&& fn) {
  try {
    return fn();
  } catch (const TrainingDivergedError& e) {
    throw TrainingDivergedError("member " + std::to_string(k) + ": " + e.reason(), e.epoch());
  }
}

std::vector<std::size_t> all_rows(const SoftLabeledDataset& ds) {
  std::vector<std::size_t> rows(ds.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Member train_member(const SoftLabeledDataset& hard, const Architecture& arch, const TrainConfig& base,
                    std::uint64_t seed, LabelMode mode) {
  TrainConfig cfg = base;
  cfg.seed = seed;
  cfg.label_mode = mode;
  return {train_bbb(hard, arch, cfg), arch};
}

void expect_kind(const MethodSpec& spec, std::initializer_list<MethodKind> kinds, const char* fn) {
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
    throw UsageError(std::string(fn) + " cannot train method '" + to_string(spec.kind) + "'");
  if (spec.K == 0) throw UsageError("ensemble size K must be at least 1");
}

}  // namespace

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::sparsek: return "sparsek";
    case MethodKind::jnn: return "jnn";
    case MethodKind::nl: return "nl";
    case MethodKind::nle: return "nle";
    case MethodKind::bag: return "bag";
  }
  return "?";
}

std::string display_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::sparsek: return "SparseK";
    case MethodKind::jnn: return "JNN";
    case MethodKind::nl: return "NL";
    case MethodKind::nle: return "NLE";
    case MethodKind::bag: return "Bag";
  }
  return "?";
}

MethodKind method_kind_from_string(const std::string& s) {
  for (MethodKind k : kAllMethods)
    if (to_string(k) == s) return k;
  throw UsageError("unknown method '" + s + "' (expected sparsek, jnn, nl, nle or bag)");
}

std::string to_string(BagLabels b) { return b == BagLabels::sample ? "sample" : "argmax"; }

BagLabels bag_labels_from_string(const std::string& s) {
  if (s == "sample") return BagLabels::sample;
  if (s == "argmax") return BagLabels::argmax;
  throw UsageError("unknown bag label mode '" + s + "' (expected sample or argmax)");
}

std::vector<std::string> normalize(MethodSpec& spec) {
  std::vector<std::string> warnings;
  if (spec.K == 0) throw UsageError("ensemble size K must be at least 1");
  if ((spec.kind == MethodKind::jnn || spec.kind == MethodKind::nl) && spec.K != 1) {
    warnings.push_back("method " + to_string(spec.kind) + " trains a single network; K=" + std::to_string(spec.K) +
                       " forced to 1");
    spec.K = 1;
  }
  return warnings;
}

DatasetInstantiation sample_instantiation(const SoftLabeledDataset& ds, Rng& rng) {
  if (ds.rows() == 0) throw DataError("cannot sample an instantiation of an empty dataset");
  ds.validate();
  DatasetInstantiation out;
  out.labels.reserve(ds.rows());
  for (std::size_t r = 0; r < ds.rows(); ++r) out.labels.push_back(sample_categorical(ds.soft_labels.row(r), rng));
  return out;
}

std::vector<std::size_t> argmax_labels(const SoftLabeledDataset& ds) {
  std::vector<std::size_t> out(ds.rows());
  for (std::size_t r = 0; r < ds.rows(); ++r) out[r] = argmax(ds.soft_labels.row(r));
  return out;
}

SoftLabeledDataset with_hard_labels(const SoftLabeledDataset& ds, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& labels) {
  if (rows.size() != labels.size()) throw ShapeError("row and label counts differ");
  const std::size_t d = ds.dims(), c = ds.classes();
  SoftLabeledDataset out;
  out.features = Tensor::matrix(rows.size(), d);
  out.soft_labels = Tensor::matrix(rows.size(), c);
  out.split = ds.split;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] >= c) throw DataError("label out of range", i + 1);
    std::copy_n(ds.features.row(rows[i]).begin(), d, out.features.row(i).begin());
    out.soft_labels(i, labels[i]) = 1.0;
    if (!ds.ids.empty()) out.ids.push_back(ds.ids[rows[i]]);
  }
  if (ds.true_labels) {
    std::vector<std::size_t> t(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) t[i] = (*ds.true_labels)[rows[i]];
    out.true_labels = std::move(t);
  }
  return out;
}

Predictor train_sparsek(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec) {
  expect_kind(spec, {MethodKind::sparsek}, "train_sparsek");
  const auto rows = all_rows(ds);
  Predictor p;
  p.combine = Combine::average;
  p.members = sparse_k_members(
      ds, spec.K, spec.train.seed,
      [&](const DatasetInstantiation& d, std::uint64_t seed) {
        return annotate_member(seed - spec.train.seed, [&] {
          return train_member(with_hard_labels(ds, rows, d.labels), arch, spec.train, seed, LabelMode::fixed);
        });
      },
      spec.parallel);
  return p;
}

Predictor train_jnn(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec) {
  expect_kind(spec, {MethodKind::jnn}, "train_jnn");
  Predictor p;
  p.members.push_back(train_member(ds, arch, spec.train, spec.train.seed, LabelMode::resample));
  return p;
}

Predictor train_baseline(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec) {
  expect_kind(spec, {MethodKind::nl, MethodKind::nle, MethodKind::bag}, "train_baseline");
  const auto rows = all_rows(ds);
  const auto hard = argmax_labels(ds);
  Predictor p;
  switch (spec.kind) {
    case MethodKind::nl:
      p.members.push_back(
          train_member(with_hard_labels(ds, rows, hard), arch, spec.train, spec.train.seed, LabelMode::fixed));
      break;
    case MethodKind::nle: {
      const SoftLabeledDataset labeled = with_hard_labels(ds, rows, hard);
      p.combine = Combine::vote;
      p.members = run_members(spec.K, spec.parallel, [&](std::size_t k) {
        return annotate_member(
            k, [&] { return train_member(labeled, arch, spec.train, spec.train.seed + k, LabelMode::fixed); });
      });
      break;
    }
    case MethodKind::bag:
      p.members = run_members(spec.K, spec.parallel, [&](std::size_t k) {
        return annotate_member(k, [&] {
          const std::uint64_t seed = spec.train.seed + k;
          Rng rng = make_rng(seed, kBootstrapStream);
          std::vector<std::size_t> picked(ds.rows()), labels(ds.rows());
          for (std::size_t& i : picked)
            i = std::min(ds.rows() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(ds.rows())));
          for (std::size_t i = 0; i < ds.rows(); ++i)
            labels[i] = spec.bag_labels == BagLabels::sample ? sample_categorical(ds.soft_labels.row(picked[i]), rng)
                                                             : hard[picked[i]];
          return train_member(with_hard_labels(ds, picked, labels), arch, spec.train, seed, LabelMode::fixed);
        });
      });
      break;
    default:
      break;
  }
  return p;
}

Predictor train_method(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec) {
  switch (spec.kind) {
    case MethodKind::sparsek: return train_sparsek(ds, arch, spec);
    case MethodKind::jnn: return train_jnn(ds, arch, spec);
    default: return train_baseline(ds, arch, spec);
  }
}

Tensor average_predictions(const std::vector<Tensor>& member_preds) {
  if (member_preds.empty()) throw UsageError("no member predictions to average");
  if (member_preds.size() == 1) return member_preds.front();
  Tensor out = member_preds.front();
  for (std::size_t m = 1; m < member_preds.size(); ++m) {
    if (member_preds[m].shape() != out.shape()) throw ShapeError("member predictions differ in shape");
    auto dst = out.values();
    auto src = member_preds[m].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& v : row) v /= total;
  }
  return out;
}

namespace {

std::vector<Tensor> member_predictions(const Predictor& p, const Tensor& x, std::size_t samples, Rng& rng) {
  if (p.members.empty()) throw UsageError("predictor has no members");
  // Members share one noise stream, so identical members predict identically.
  const Rng start = rng;
  std::vector<Tensor> preds;
  for (const Member& m : p.members) {
    Rng member_rng = start;
    preds.push_back(posterior_predictive(m.theta, m.arch, x, samples, member_rng));
    rng = member_rng;
  }
  return preds;
}

}  // namespace

Tensor predict(const Predictor& p, const Tensor& x, std::size_t samples, Rng& rng) {
  return average_predictions(member_predictions(p, x, samples, rng));
}

PredictionResult predict_with_labels(const Predictor& p, const Tensor& x, std::size_t samples, Rng& rng) {
  const auto preds = member_predictions(p, x, samples, rng);
  PredictionResult out{average_predictions(preds), {}};
  const std::size_t rows = out.probs.rows(), c = out.probs.cols();
  out.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (p.combine == Combine::average) {
      out.labels[r] = argmax(out.probs.row(r));
      continue;
    }
    std::vector<double> votes(c, 0.0);
    for (const Tensor& m : preds) votes[argmax(m.row(r))] += 1.0;
    out.labels[r] = argmax(votes);
  }
  return out;
}

double mean_posterior_sd(const Predictor& p) {
  if (p.members.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : p.members) s += mean_posterior_sd(m.theta);
  return s / static_cast<double>(p.members.size());
}

}  // namespace softev
