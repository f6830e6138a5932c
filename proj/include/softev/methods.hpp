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


// Training procedures for soft-labeled data behind one predictor interface:
//   sparsek  K networks, each on its own hard-label draw D_k ~ R(D)
//   jnn      one network whose loss resamples labels per weight sample
//   nl       one network on argmax labels
//   nle      K networks on argmax labels, majority vote for the class
//   bag      K networks on bootstrap rows with labels drawn from R
//
// Member k of an ensemble uses seed train.seed + k for everything it draws,
// so results do not depend on the order or concurrency of member training.

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <future>
#include <string>
#include <type_traits>
#include <vector>

#include "softev/data.hpp"
#include "softev/diff_engine.hpp"
#include "softev/error.hpp"
#include "softev/random.hpp"
#include "softev/variational.hpp"

namespace softev {

enum class MethodKind { sparsek, jnn, nl, nle, bag };

std::string to_string(MethodKind kind);
std::string display_name(MethodKind kind);
MethodKind method_kind_from_string(const std::string& s);
inline constexpr MethodKind kAllMethods[] = {MethodKind::sparsek, MethodKind::jnn, MethodKind::nl, MethodKind::nle,
                                             MethodKind::bag};

// How Bag labels its bootstrap rows.
enum class BagLabels { sample, argmax };
std::string to_string(BagLabels b);
BagLabels bag_labels_from_string(const std::string& s);

struct MethodSpec {
  MethodKind kind = MethodKind::sparsek;
  std::size_t K = 3;
  TrainConfig train;
  BagLabels bag_labels = BagLabels::sample;
  bool parallel = false;
};

// Forces K = 1 for single-network methods. Returns a warning per coercion.
std::vector<std::string> normalize(MethodSpec& spec);

enum class Combine { average, vote };

struct Member {
  VariationalParams theta;
  Architecture arch;
  bool operator==(const Member&) const = default;
};

struct Predictor {
  std::vector<Member> members;
  Combine combine = Combine::average;
  bool operator==(const Predictor&) const = default;
};

struct DatasetInstantiation {
  std::vector<std::size_t> labels;
};

// Stream ids passed to make_rng(member_seed, stream).
inline constexpr std::uint64_t kTrainStream = 0;
inline constexpr std::uint64_t kInstantiationStream = 1;
inline constexpr std::uint64_t kBootstrapStream = 2;

// One label per row drawn independently from its R.
DatasetInstantiation sample_instantiation(const SoftLabeledDataset& ds, Rng& rng);

// argmax R per row, ties to the lowest class.
std::vector<std::size_t> argmax_labels(const SoftLabeledDataset& ds);

// Copy of `ds` restricted to `rows` (repeats allowed) with one-hot labels.
SoftLabeledDataset with_hard_labels(const SoftLabeledDataset& ds, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& labels);

// Runs fn(0..count-1), concurrently when `parallel`. The first failure, in
// member order, is rethrown.
template <class Fn>
auto run_members(std::size_t count, bool parallel, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out;
  out.reserve(count);
  if (!parallel) {
    for (std::size_t k = 0; k < count; ++k) out.push_back(fn(k));
    return out;
  }
  std::vector<std::future<Result>> futures;
  for (std::size_t k = 0; k < count; ++k) futures.push_back(std::async(std::launch::async, fn, k));
  std::exception_ptr first;
  for (auto& f : futures) {
    try {
      out.push_back(f.get());
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return out;
}

// Sparse-K skeleton: member k trains `learner(D_k, seed + k)` on its own draw
// D_k ~ R(D), labels frozen for that member. Base-learner agnostic.
template <class Learner>
auto sparse_k_members(const SoftLabeledDataset& ds, std::size_t K, std::uint64_t seed, Learner&& learner,
                      bool parallel = false) {
  if (K == 0) throw UsageError("ensemble size K must be at least 1");
  return run_members(K, parallel, [&](std::size_t k) {
    Rng rng = make_rng(seed + k, kInstantiationStream);
    const DatasetInstantiation d = sample_instantiation(ds, rng);
    return learner(d, seed + k);
  });
}

Predictor train_sparsek(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec);
Predictor train_jnn(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec);
Predictor train_baseline(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec);
Predictor train_method(const SoftLabeledDataset& ds, const Architecture& arch, const MethodSpec& spec);

// Row-wise mean of equally shaped prediction matrices, renormalized.
Tensor average_predictions(const std::vector<Tensor>& member_preds);

// Every member samples from the same copy of `rng`; a single member passes
// through unchanged.
Tensor predict(const Predictor& p, const Tensor& x, std::size_t samples, Rng& rng);

// Predicted classes: argmax of the averaged predictive, or, for vote
// predictors, the majority of member argmaxes (ties to the lowest class).
// Consumes `rng` exactly like predict().
struct PredictionResult {
  Tensor probs;
  std::vector<std::size_t> labels;
};
PredictionResult predict_with_labels(const Predictor& p, const Tensor& x, std::size_t samples, Rng& rng);

// Mean posterior sd averaged over members.
double mean_posterior_sd(const Predictor& p);

}  // namespace softev
