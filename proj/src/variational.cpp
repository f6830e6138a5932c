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


#include "softev/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "softev/error.hpp"

namespace softev {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ParameterSet sample_noise(const ParameterSet& like, Rng& rng) {
  ParameterSet noise = ParameterSet::like(like);
  for (auto& e : noise)
    for (double& v : e.value.values()) v = standard_normal(rng);
  return noise;
}

Tensor sample_one_hot(const Tensor& dists, Rng& rng) {
  Tensor out = Tensor::matrix(dists.rows(), dists.cols());
  for (std::size_t r = 0; r < dists.rows(); ++r) out(r, sample_categorical(dists.row(r), rng)) = 1.0;
  return out;
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw DomainError("inverse_softplus needs a positive argument");
  return y + std::log(-std::expm1(-y));
}

void check_variational(const VariationalParams& theta, const Architecture& arch) {
  check_parameters(theta.mu, arch);
  check_parameters(theta.rho, arch);
}

VariationalParams init_variational(const Architecture& arch, Rng& rng, double initial_sd) {
  VariationalParams theta{zero_parameters(arch), zero_parameters(arch)};
  const double rho0 = inverse_softplus(initial_sd);
  for (std::size_t l = 0; l < arch.affine_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.widths()[l]));
    for (std::size_t t : {2 * l, 2 * l + 1})
      for (double& v : theta.mu[t].value.values()) v = bound * (2.0 * uniform01(rng) - 1.0);
  }
  for (auto& e : theta.rho)
    for (double& v : e.value.values()) v = rho0;
  return theta;
}

void PriorSpec::validate() const {
  if (!(sd1 > 0.0) || !(sd2 > 0.0)) throw DomainError("prior standard deviations must be positive");
  if (kind == Kind::mixture && !(mix > 0.0 && mix < 1.0)) throw DomainError("prior mixture weight must lie in (0, 1)");
}

double PriorSpec::log_density(double w) const {
  if (kind == Kind::single_gaussian) return gaussian_log_pdf(w, 0.0, sd1);
  const double a = std::log(mix) + gaussian_log_pdf(w, 0.0, sd1);
  const double b = std::log1p(-mix) + gaussian_log_pdf(w, 0.0, sd2);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double PriorSpec::dlog_density(double w) const {
  if (kind == Kind::single_gaussian) return -w / (sd1 * sd1);
  // Posterior responsibility of component 1 times its score, plus component 2.
  const double a = std::log(mix) + gaussian_log_pdf(w, 0.0, sd1);
  const double b = std::log1p(-mix) + gaussian_log_pdf(w, 0.0, sd2);
  const double r1 = sigmoid(a - b);
  return r1 * (-w / (sd1 * sd1)) + (1.0 - r1) * (-w / (sd2 * sd2));
}

ParameterSet reparameterize(const VariationalParams& theta, const ParameterSet& noise) {
  if (!theta.mu.same_layout(noise) || !theta.mu.same_layout(theta.rho))
    throw ShapeError("noise does not match the variational parameters");
  ParameterSet w = theta.mu;
  for (std::size_t t = 0; t < w.size(); ++t) {
    auto wv = w[t].value.values();
    auto rv = theta.rho[t].value.values();
    auto ev = noise[t].value.values();
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] += softplus(rv[i]) * ev[i];
  }
  return w;
}

WeightSample sample_weights(const VariationalParams& theta, Rng& rng) {
  ParameterSet noise = sample_noise(theta.mu, rng);
  ParameterSet weights = reparameterize(theta, noise);
  return {std::move(weights), std::move(noise)};
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || mc_samples == 0)
    throw UsageError("epochs, batch size and Monte Carlo samples must be positive");
  if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("momentum must lie in [0, 1)");
  if (!(initial_sd > 0.0)) throw UsageError("initial sd must be positive");
  prior.validate();
}

BbbLoss bbb_objective(const VariationalParams& theta, const Architecture& arch, const Tensor& x,
                      const std::vector<BbbDraw>& draws, const PriorSpec& prior, double kl_scale) {
  check_variational(theta, arch);
  prior.validate();
  if (draws.empty()) throw UsageError("bbb_objective needs at least one draw");
  if (!(kl_scale > 0.0)) throw UsageError("kl_scale must be positive");
  const std::size_t rows = x.rows();
  if (rows == 0) throw UsageError("empty batch");

  const double n = static_cast<double>(draws.size());
  const double scale = 1.0 / (n * static_cast<double>(rows));
  BbbLoss out{0.0, GradientSet::like(theta.mu), GradientSet::like(theta.mu)};

  for (const BbbDraw& draw : draws) {
    if (draw.targets.rows() != rows || draw.targets.cols() != arch.output_dim())
      throw ShapeError("targets do not match batch rows and class count");
    const ParameterSet w = reparameterize(theta, draw.noise);

    double complexity = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      auto wv = w[t].value.values();
      auto mv = theta.mu[t].value.values();
      auto rv = theta.rho[t].value.values();
      for (std::size_t i = 0; i < wv.size(); ++i)
        complexity += gaussian_log_pdf(wv[i], mv[i], softplus(rv[i])) - prior.log_density(wv[i]);
    }

    ForwardTrace trace;
    const Tensor logits = mlp_forward(w, x, arch, &trace);
    Tensor dlogits = Tensor::matrix(rows, arch.output_dim());
    double nll = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto ce = soft_cross_entropy(logits.row(r), draw.targets.row(r));
      nll += ce.value;
      std::copy(ce.grad.begin(), ce.grad.end(), dlogits.row(r).begin());
    }
    const GradientSet gw = mlp_backward(w, arch, trace, dlogits);

    out.value += (kl_scale * complexity + nll) * scale;
    // log q(w | mu, sd) = -log sd - eps^2 / 2 + const along the
    // reparameterization, so it contributes -1/sd to d/dsd and nothing to d/dmu.
    for (std::size_t t = 0; t < w.size(); ++t) {
      auto wv = w[t].value.values();
      auto rv = theta.rho[t].value.values();
      auto ev = draw.noise[t].value.values();
      auto gv = gw[t].value.values();
      auto gmu = out.grad_mu[t].value.values();
      auto grho = out.grad_rho[t].value.values();
      for (std::size_t i = 0; i < wv.size(); ++i) {
        const double sd = softplus(rv[i]);
        const double dw = gv[i] - kl_scale * prior.dlog_density(wv[i]);
        gmu[i] += dw * scale;
        grho[i] += (dw * ev[i] - kl_scale / sd) * sigmoid(rv[i]) * scale;
      }
    }
  }
  return out;
}

BbbLoss bbb_loss(const VariationalParams& theta, const Architecture& arch, const Batch& batch,
                 const PriorSpec& prior, std::size_t n, LabelMode mode, double kl_scale, Rng& rng) {
  if (n == 0) throw UsageError("bbb_loss needs at least one Monte Carlo sample");
  if (batch.x.rank() != 2 || batch.x.rows() == 0) throw UsageError("bbb_loss needs a nonempty batch");
  // All noise is drawn before any labels so both modes see the same weights.
  std::vector<BbbDraw> draws(n);
  for (auto& d : draws) d.noise = sample_noise(theta.mu, rng);
  for (auto& d : draws) d.targets = mode == LabelMode::resample ? sample_one_hot(batch.targets, rng) : batch.targets;
  return bbb_objective(theta, arch, batch.x, draws, prior, kl_scale);
}

VariationalParams train_bbb(const SoftLabeledDataset& ds, const Architecture& arch, const TrainConfig& config) {
  config.validate();
  ds.validate();
  if (ds.rows() == 0) throw UsageError("cannot train on an empty dataset");
  if (arch.input_dim() != ds.dims() || arch.output_dim() != ds.classes())
    throw ShapeError("architecture " + shape_string(arch.widths()) + " does not fit data with " +
                     std::to_string(ds.dims()) + " features and " + std::to_string(ds.classes()) + " classes");

  Rng rng = make_rng(config.seed, 0);
  VariationalParams theta = init_variational(arch, rng, config.initial_sd);
  GradientSet mu_state = GradientSet::like(theta.mu), rho_state = GradientSet::like(theta.rho);

  const std::size_t n = ds.rows();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  const double kl_scale = 1.0 / static_cast<double>(batches);
  const std::size_t d = ds.dims(), c = ds.classes();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
      Batch batch{Tensor::matrix(hi - lo, d), Tensor::matrix(hi - lo, c)};
      for (std::size_t r = lo; r < hi; ++r) {
        std::copy_n(ds.features.row(order[r]).begin(), d, batch.x.row(r - lo).begin());
        std::copy_n(ds.soft_labels.row(order[r]).begin(), c, batch.targets.row(r - lo).begin());
      }
      LabelMode mode = config.label_mode;
      if (mode == LabelMode::resample && config.resample_scope == ResampleScope::per_batch) {
        batch.targets = sample_one_hot(batch.targets, rng);
        mode = LabelMode::fixed;
      }
      BbbLoss loss;
      try {
        loss = bbb_loss(theta, arch, batch, config.prior, config.mc_samples, mode, kl_scale, rng);
      } catch (const NumericError& e) {
        throw TrainingDivergedError(e.what(), epoch);
      } catch (const DomainError& e) {
        throw TrainingDivergedError(e.what(), epoch);
      }
      if (!std::isfinite(loss.value)) throw TrainingDivergedError("training loss became non-finite", epoch);
      sgd_step(theta.mu, loss.grad_mu, config.lr, config.momentum, mu_state);
      sgd_step(theta.rho, loss.grad_rho, config.lr, config.momentum, rho_state);
    }
    for (const auto* set : {&theta.mu, &theta.rho})
      for (const auto& e : *set)
        for (double v : e.value.values())
          if (!std::isfinite(v)) throw TrainingDivergedError("parameters became non-finite", epoch);
  }
  return theta;
}

Tensor posterior_predictive(const VariationalParams& theta, const Architecture& arch, const Tensor& x,
                            std::size_t samples, Rng& rng) {
  if (samples == 0) throw UsageError("posterior_predictive needs at least one sample");
  check_variational(theta, arch);
  const std::size_t rows = x.rank() == 1 ? 1 : x.rows();
  const std::size_t c = arch.output_dim();
  Tensor probs = Tensor::matrix(rows, c);
  for (std::size_t s = 0; s < samples; ++s) {
    const WeightSample w = sample_weights(theta, rng);
    const Tensor logits = mlp_forward(w.weights, x, arch);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto p = softmax(logits.values().subspan(r * c, c));
      auto out = probs.row(r);
      for (std::size_t k = 0; k < c; ++k) out[k] += p[k];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    auto out = probs.row(r);
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= total;
  }
  return probs;
}

std::vector<WeightStatsRow> export_weight_stats(const VariationalParams& theta, const Architecture& arch) {
  check_variational(theta, arch);
  std::vector<WeightStatsRow> rows;
  const double width = (kHistogramHigh - kHistogramLow) / static_cast<double>(kHistogramBins);
  for (std::size_t l = 0; l < arch.affine_layers(); ++l) {
    WeightStatsRow row;
    row.layer = "layer" + std::to_string(l);
    std::size_t count = 0;
    for (std::size_t t : {2 * l, 2 * l + 1}) {
      auto mv = theta.mu[t].value.values();
      auto rv = theta.rho[t].value.values();
      for (std::size_t i = 0; i < mv.size(); ++i) {
        row.mean_abs_mu += std::abs(mv[i]);
        row.mean_sd += softplus(rv[i]);
        std::size_t bin;
        if (mv[i] < kHistogramLow) {
          bin = 0;
        } else if (mv[i] > kHistogramHigh) {
          bin = kHistogramBins + 1;
        } else {
          bin = 1 + std::min(kHistogramBins - 1, static_cast<std::size_t>((mv[i] - kHistogramLow) / width));
        }
        ++row.histogram[bin];
        ++count;
      }
    }
    row.mean_abs_mu /= static_cast<double>(count);
    row.mean_sd /= static_cast<double>(count);
    rows.push_back(row);
  }
  return rows;
}

void write_weight_stats_csv(const std::vector<WeightStatsRow>& rows, std::ostream& out) {
  out << "layer,mean_abs_mu,mean_sd";
  for (std::size_t b = 0; b < kHistogramBins + 2; ++b) out << ",bin_" << b;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.layer << ',' << r.mean_abs_mu << ',' << r.mean_sd;
    for (std::size_t h : r.histogram) out << ',' << h;
    out << '\n';
  }
  out.precision(old_precision);
}

double mean_posterior_sd(const VariationalParams& theta) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& e : theta.rho)
    for (double v : e.value.values()) {
      s += softplus(v);
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

}  // namespace softev
