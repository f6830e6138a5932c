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


// Experiment harness shared by the C API and the command-line tool: run
// configuration, data preparation, single-method training, the five-method
// benchmark, and JSON (de)serialisation of models and results.
//
// Seed derivation (master seed m, repeat r, method index i, member k):
//   repeat seed        s_r = m + r
//   synthetic data     make_rng(s_r, 100) train, make_rng(s_r, 101) test,
//                      corruption seeds derive_seed(s_r, 102) / (s_r, 103)
//   method i training  train.seed = derive_seed(s_r, 200 + i); member k uses train.seed + k
//   method i predict   make_rng(s_r, 300 + i)
// Method indices follow kAllMethods (sparsek, jnn, nl, nle, bag).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "softev/data.hpp"
#include "softev/methods.hpp"
#include "softev/metrics.hpp"

namespace softev {

struct SynthSpec {
  std::size_t classes = 4;
  std::size_t dims = 8;
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 250;
  double separation = 3.0;
  std::size_t annotators = 3;
  double error_rate = 0.308;
};

struct RunConfig {
  std::vector<MethodKind> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t K = 3;
  std::vector<std::size_t> hidden{32};
  TrainConfig train;
  std::size_t pred_samples = kDefaultPredictiveSamples;
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<SynthSpec> synth;
  std::size_t repeats = 1;
  EvalLabelConvention eval_labels = EvalLabelConvention::true_label;
  BagLabels bag_labels = BagLabels::sample;
  bool parallel = false;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> weight_stats_dir;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are a UsageError.
  static RunConfig from_json(const nlohmann::json& j);
};

struct DataSplit {
  SoftLabeledDataset train;
  SoftLabeledDataset test;
};

// Loads the CSV pair or regenerates the synthetic split for `repeat_seed`.
DataSplit prepare_data(const RunConfig& config, std::uint64_t repeat_seed);

Architecture architecture_for(const RunConfig& config, const SoftLabeledDataset& train);

RepeatMetrics evaluate(const Predictor& predictor, const SoftLabeledDataset& test, std::size_t samples, Rng& rng,
                       EvalLabelConvention convention);

struct TrainOutcome {
  Predictor predictor;
  MethodKind method;
  nlohmann::json record;
};

// Trains config.methods.front() on repeat 0 and evaluates it on the test
// split. Training divergence propagates as TrainingDivergedError.
TrainOutcome run_train(const RunConfig& config);

// All configured methods over all repeats. Failures are recorded per method
// and do not stop the run.
nlohmann::json run_bench(const RunConfig& config);

// Table-style rows: accuracy in percent, NLL x10, Brier x10^3, each as
// "mean (std)".
std::string format_table(const nlohmann::json& record);

nlohmann::json predictor_to_json(const Predictor& p, MethodKind kind);
Predictor predictor_from_json(const nlohmann::json& j);

// Writes train/test CSVs for the configured synthetic split (repeat 0).
void generate_data(const RunConfig& config, const std::filesystem::path& train_out,
                   const std::filesystem::path& test_out);

// The record without its wall-clock field.
nlohmann::json without_wall_clock(nlohmann::json record);

}  // namespace softev
