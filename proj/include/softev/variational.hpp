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


// Mean-field Gaussian variational networks trained with Bayes by Backprop.
//
// Every network scalar w has a variational mean mu and a raw scale rho with
// sd = softplus(rho). Weights are sampled as w = mu + sd * eps, eps ~ N(0, 1),
// and gradients reach (mu, rho) through that reparameterization.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "softev/data.hpp"
#include "softev/diff_engine.hpp"
#include "softev/jeffrey.hpp"
#include "softev/random.hpp"
#include "softev/tensor.hpp"

namespace softev {

double softplus(double x);
double inverse_softplus(double y);

struct VariationalParams {
  ParameterSet mu;
  ParameterSet rho;
  bool operator==(const VariationalParams&) const = default;
};

void check_variational(const VariationalParams& theta, const Architecture& arch);

// Variational family initialised with mu ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))
// and softplus(rho) = initial_sd.
VariationalParams init_variational(const Architecture& arch, Rng& rng, double initial_sd = 0.05);

struct PriorSpec {
  enum class Kind { single_gaussian, mixture };
  Kind kind = Kind::single_gaussian;
  double sd1 = 1.0;
  double sd2 = 0.1;
  double mix = 0.5;  // weight of the sd1 component

  void validate() const;
  double log_density(double w) const;
  double dlog_density(double w) const;
};

struct WeightSample {
  ParameterSet weights;
  ParameterSet noise;  // the eps realisation behind `weights`
};

WeightSample sample_weights(const VariationalParams& theta, Rng& rng);
// w = mu + softplus(rho) * noise for a given noise realisation.
ParameterSet reparameterize(const VariationalParams& theta, const ParameterSet& noise);

enum class LabelMode { fixed, resample };
// When label_mode is resample: per_sample draws fresh labels for every Monte
// Carlo weight sample, per_batch draws one instantiation per minibatch.
enum class ResampleScope { per_sample, per_batch };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t mc_samples = 1;
  double lr = 0.01;
  double momentum = 0.9;
  PriorSpec prior;
  LabelMode label_mode = LabelMode::fixed;
  ResampleScope resample_scope = ResampleScope::per_sample;
  std::uint64_t seed = 0;
  double initial_sd = 0.05;

  void validate() const;
};

// A minibatch: inputs {B, d} and per-row label distributions {B, C}.
struct Batch {
  Tensor x;
  Tensor targets;
};

struct BbbLoss {
  double value = 0.0;
  GradientSet grad_mu;
  GradientSet grad_rho;
};

// One Monte Carlo term: a weight-noise realisation and the targets it is
// paired with ({B, C}).
struct BbbDraw {
  ParameterSet noise;
  Tensor targets;
};

// Per-row Bayes-by-Backprop objective
//   (1/n) sum_i [ kl_scale (log q(w_i) - log P(w_i)) + sum_rows CE(f(x; w_i), t_i) ] / B
// and its exact gradient, for fixed draws.
BbbLoss bbb_objective(const VariationalParams& theta, const Architecture& arch, const Tensor& x,
                      const std::vector<BbbDraw>& draws, const PriorSpec& prior, double kl_scale);

// Draws n weight samples (and, in resample mode, one-hot targets from each
// row's distribution) and evaluates bbb_objective.
BbbLoss bbb_loss(const VariationalParams& theta, const Architecture& arch, const Batch& batch,
                 const PriorSpec& prior, std::size_t n, LabelMode mode, double kl_scale, Rng& rng);

// Minibatch momentum-SGD over (mu, rho) with kl_scale = 1 / (number of
// minibatches). Deterministic given config.seed.
VariationalParams train_bbb(const SoftLabeledDataset& ds, const Architecture& arch, const TrainConfig& config);

// Rows of x ({B, d} or {d}) -> {B, C} averaged softmax over S weight samples.
Tensor posterior_predictive(const VariationalParams& theta, const Architecture& arch, const Tensor& x,
                            std::size_t samples, Rng& rng);

inline constexpr std::size_t kDefaultPredictiveSamples = 32;

inline constexpr std::size_t kHistogramBins = 64;
inline constexpr double kHistogramLow = -3.0;
inline constexpr double kHistogramHigh = 3.0;

// Bin 0 counts mu < -3, bins 1..64 split [-3, 3] uniformly (3 itself lands in
// bin 64), bin 65 counts mu > 3.
struct WeightStatsRow {
  std::string layer;
  double mean_abs_mu = 0.0;
  double mean_sd = 0.0;
  std::array<std::size_t, kHistogramBins + 2> histogram{};
};

std::vector<WeightStatsRow> export_weight_stats(const VariationalParams& theta, const Architecture& arch);
void write_weight_stats_csv(const std::vector<WeightStatsRow>& rows, std::ostream& out);

// Mean of softplus(rho) over every scalar of the network.
double mean_posterior_sd(const VariationalParams& theta);

}  // namespace softev
