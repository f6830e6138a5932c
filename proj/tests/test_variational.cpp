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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "softev/data.hpp"
#include "softev/error.hpp"
#include "softev/variational.hpp"

using namespace softev;
using doctest::Approx;

namespace {

VariationalParams constant_theta(const Architecture& arch, double mu, double sd) {
  VariationalParams t{zero_parameters(arch), zero_parameters(arch)};
  for (auto& e : t.mu)
    for (double& v : e.value.values()) v = mu;
  for (auto& e : t.rho)
    for (double& v : e.value.values()) v = inverse_softplus(sd);
  return t;
}

std::vector<BbbDraw> make_draws(const VariationalParams& theta, const Tensor& targets, std::size_t n, Rng& rng) {
  std::vector<BbbDraw> draws;
  for (std::size_t i = 0; i < n; ++i) draws.push_back({sample_weights(theta, rng).noise, targets});
  return draws;
}

double mean_ce(const ParameterSet& w, const Architecture& arch, const Tensor& x, const Tensor& targets) {
  const Tensor logits = mlp_forward(w, x, arch);
  double s = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) s += soft_cross_entropy(logits.row(r), targets.row(r)).value;
  return s / static_cast<double>(logits.rows());
}

// Plain gradient-descent logistic regression used as a separability oracle.
double logistic_regression_accuracy(const SoftLabeledDataset& ds) {
  const std::size_t n = ds.rows(), d = ds.dims();
  std::vector<double> w(d + 1, 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * ds.features(i, j);
      const double err = 1.0 / (1.0 + std::exp(-z)) - ds.soft_labels(i, 1);
      for (std::size_t j = 0; j < d; ++j) g[j] += err * ds.features(i, j);
      g[d] += err;
    }
    for (std::size_t j = 0; j <= d; ++j) w[j] -= 0.1 * g[j] / static_cast<double>(n);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * ds.features(i, j);
    correct += ((z > 0) == (ds.soft_labels(i, 1) > 0.5));
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double accuracy_of(const Tensor& probs, const SoftLabeledDataset& ds) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < ds.rows(); ++r) correct += argmax(probs.row(r)) == argmax(ds.soft_labels.row(r));
  return static_cast<double>(correct) / static_cast<double>(ds.rows());
}

}  // namespace

TEST_CASE("softplus round trip") {
  for (double y : {1e-14, 1e-6, 0.05, 1.0, 7.5, 40.0}) CHECK(softplus(inverse_softplus(y)) == Approx(y).epsilon(1e-9));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(softplus(800.0) == Approx(800.0));
}

TEST_CASE("sample_weights examples") {
  Architecture arch({3, 2});
  Rng rng(1);
  const VariationalParams tight = constant_theta(arch, 0.7, 1e-14);
  const WeightSample s = sample_weights(tight, rng);
  for (std::size_t t = 0; t < s.weights.size(); ++t)
    for (double v : s.weights[t].value.values()) CHECK(std::abs(v - 0.7) <= 1e-12);

  Architecture big({1000, 100});
  const VariationalParams unit = constant_theta(big, 0.0, 1.0);
  const WeightSample u = sample_weights(unit, rng);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& e : u.weights)
    for (double v : e.value.values()) sum += v, sq += v * v, ++n;
  REQUIRE(n >= 100000);
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(sd - 1.0) <= 0.02);

  Rng a(99);
  const VariationalParams theta = init_variational(arch, a);
  Rng c(5), d(5);
  CHECK(sample_weights(theta, c).weights == sample_weights(theta, d).weights);
  Rng e(6), f(6);
  CHECK(reparameterize(theta, sample_weights(theta, e).noise) == sample_weights(theta, f).weights);
}

TEST_CASE("init_variational ranges") {
  Architecture arch({16, 8, 3});
  Rng rng(2);
  const VariationalParams theta = init_variational(arch, rng);
  for (std::size_t t = 0; t < theta.mu.size(); ++t) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(t < 2 ? 16 : 8));
    for (double v : theta.mu[t].value.values()) CHECK(std::abs(v) <= bound);
    for (double r : theta.rho[t].value.values()) CHECK(softplus(r) == Approx(0.05).epsilon(1e-12));
  }
}

TEST_CASE("bbb_loss with prior equal to posterior") {
  Architecture arch({2, 3});
  const VariationalParams theta = constant_theta(arch, 0.0, 1.0);
  Tensor x = Tensor::matrix(1, 2);
  x(0, 0) = 0.4;
  x(0, 1) = -1.1;
  const Tensor target({1, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  Rng rng(17);
  const std::size_t n = 10000;
  const auto draws = make_draws(theta, target, n, rng);
  const BbbLoss loss = bbb_objective(theta, arch, x, draws, PriorSpec{}, 1.0);
  double ce = 0.0;
  for (const auto& d : draws) ce += mean_ce(reparameterize(theta, d.noise), arch, x, target);
  ce /= static_cast<double>(n);
  // log q - log P is identically zero here, so only the likelihood remains.
  CHECK(std::abs(loss.value - ce) <= 1e-9);

  // A network that always outputs zero logits gives exactly log C.
  const VariationalParams zero = constant_theta(arch, 0.0, 1e-14);
  Rng r2(4);
  const BbbLoss z = bbb_loss(zero, arch, Batch{x, target}, PriorSpec{}, 3,
                             LabelMode::fixed, 1e-300, r2);
  CHECK(z.value == Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("bbb_loss deterministic limit reduces to cross-entropy") {
  Architecture arch({3, 4, 2});
  Rng rng(6);
  VariationalParams theta = init_variational(arch, rng);
  for (auto& e : theta.rho)
    for (double& r : e.value.values()) r = inverse_softplus(1e-14);
  Tensor x = Tensor::matrix(5, 3);
  for (double& v : x.values()) v = standard_normal(rng);
  Tensor t = Tensor::matrix(5, 2);
  for (std::size_t r = 0; r < 5; ++r) {
    const double p = uniform01(rng);
    t(r, 0) = p;
    t(r, 1) = 1.0 - p;
  }
  const BbbLoss loss = bbb_loss(theta, arch, Batch{x, t}, PriorSpec{}, 2, LabelMode::fixed, 1e-30, rng);
  CHECK(loss.value == Approx(mean_ce(theta.mu, arch, x, t)).epsilon(1e-9));
  CHECK_THROWS_AS(bbb_loss(theta, arch, Batch{Tensor::matrix(0, 3), Tensor::matrix(0, 2)}, PriorSpec{}, 1,
                           LabelMode::fixed, 1.0, rng),
                  UsageError);
  CHECK_THROWS(bbb_loss(theta, arch, Batch{x, t}, PriorSpec{}, 0, LabelMode::fixed, 1.0, rng));
  CHECK_THROWS(bbb_loss(theta, arch, Batch{x, t}, PriorSpec{}, 1, LabelMode::fixed, 0.0, rng));
}

TEST_CASE("resampling one-hot labels matches fixed mode") {
  Architecture arch({2, 3, 3});
  Rng init(12);
  const VariationalParams theta = init_variational(arch, init);
  Tensor x = Tensor::matrix(4, 2);
  for (double& v : x.values()) v = standard_normal(init);
  Tensor t = Tensor::matrix(4, 3);
  for (std::size_t r = 0; r < 4; ++r) t(r, r % 3) = 1.0;
  Rng a(77), b(77);
  const BbbLoss fixed = bbb_loss(theta, arch, Batch{x, t}, PriorSpec{}, 3, LabelMode::fixed, 0.1, a);
  const BbbLoss resampled = bbb_loss(theta, arch, Batch{x, t}, PriorSpec{}, 3, LabelMode::resample, 0.1, b);
  CHECK(resampled.value == Approx(fixed.value).epsilon(1e-12));
}

TEST_CASE("reparameterisation gradients match finite differences") {
  Rng rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const Architecture arch(trial % 2 ? std::vector<std::size_t>{3, 4, 2} : std::vector<std::size_t>{2, 5, 3});
    VariationalParams theta = init_variational(arch, rng, 0.3);
    Tensor x = Tensor::matrix(3, arch.input_dim());
    for (double& v : x.values()) v = standard_normal(rng);
    Tensor t = Tensor::matrix(3, arch.output_dim());
    for (std::size_t r = 0; r < 3; ++r) t(r, r % arch.output_dim()) = 1.0;
    PriorSpec prior;
    if (trial % 3 == 0) prior.kind = PriorSpec::Kind::mixture;
    const auto draws = make_draws(theta, t, 2, rng);
    const BbbLoss g = bbb_objective(theta, arch, x, draws, prior, 0.4);

    const double h = 1e-6;
    double worst = 0.0;
    auto check = [&](ParameterSet& target, const GradientSet& grad) {
      for (std::size_t k = 0; k < target.size(); ++k) {
        for (std::size_t i = 0; i < target[k].value.size(); ++i) {
          double& v = target[k].value[i];
          const double saved = v;
          v = saved + h;
          const double up = bbb_objective(theta, arch, x, draws, prior, 0.4).value;
          v = saved - h;
          const double down = bbb_objective(theta, arch, x, draws, prior, 0.4).value;
          v = saved;
          const double fd = (up - down) / (2 * h);
          const double an = grad[k].value[i];
          if (std::abs(fd - an) > 1e-7)
            worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)));
        }
      }
    };
    check(theta.mu, g.grad_mu);
    check(theta.rho, g.grad_rho);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("closed-form KL matches the Monte Carlo estimate") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    Architecture arch({1, 2});
    VariationalParams theta = init_variational(arch, rng);
    for (auto& e : theta.mu)
      for (double& v : e.value.values()) v = 0.8 * standard_normal(rng);
    for (auto& e : theta.rho)
      for (double& v : e.value.values()) v = inverse_softplus(0.2 + uniform01(rng));
    const double sd1 = 0.5 + uniform01(rng);
    PriorSpec prior;
    prior.sd1 = sd1;

    double closed = 0.0;
    for (std::size_t k = 0; k < theta.mu.size(); ++k) {
      for (std::size_t i = 0; i < theta.mu[k].value.size(); ++i) {
        const double m = theta.mu[k].value[i], s = softplus(theta.rho[k].value[i]);
        const double kl = 0.5 * ((s * s + m * m) / (sd1 * sd1) - 1.0 - 2.0 * std::log(s / sd1));
        CHECK(kl >= 0.0);
        closed += kl;
      }
    }

    const Tensor x({1, 1}, {0.5});
    const Tensor t({1, 2}, {0.5, 0.5});
    const std::size_t n = 10000;
    std::vector<double> est;
    for (std::size_t i = 0; i < n; ++i) {
      const auto draw = make_draws(theta, t, 1, rng);
      const double total = bbb_objective(theta, arch, x, draw, prior, 1.0).value;
      est.push_back(total - mean_ce(reparameterize(theta, draw[0].noise), arch, x, t));
    }
    const double mean = std::accumulate(est.begin(), est.end(), 0.0) / n;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    const double se = std::sqrt(var / (n - 1) / n);
    CHECK(std::abs(mean - closed) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("mixture prior density and derivative") {
  PriorSpec p;
  p.kind = PriorSpec::Kind::mixture;
  p.sd1 = 1.0;
  p.sd2 = 0.1;
  p.mix = 0.3;
  for (double w : {-2.0, -0.3, 0.0, 0.05, 1.4}) {
    const double dens = 0.3 * std::exp(gaussian_log_pdf(w, 0, 1.0)) + 0.7 * std::exp(gaussian_log_pdf(w, 0, 0.1));
    CHECK(p.log_density(w) == Approx(std::log(dens)).epsilon(1e-12));
    const double fd = (p.log_density(w + 1e-6) - p.log_density(w - 1e-6)) / 2e-6;
    CHECK(p.dlog_density(w) == Approx(fd).epsilon(1e-6));
  }
  PriorSpec bad;
  bad.mix = 1.0;
  bad.kind = PriorSpec::Kind::mixture;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = PriorSpec{};
  bad.sd1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("train_bbb fits separable blobs and is deterministic") {
  Rng data_rng(0);
  const SoftLabeledDataset ds = synth_blobs(2, 2, 100, 6.0, data_rng);
  REQUIRE(ds.rows() == 200);
  CHECK(logistic_regression_accuracy(ds) >= 0.99);

  const Architecture arch({2, 16, 2});
  TrainConfig cfg;
  cfg.seed = 4;
  const VariationalParams theta = train_bbb(ds, arch, cfg);
  Rng pred(1);
  CHECK(accuracy_of(posterior_predictive(theta, arch, ds.features, 32, pred), ds) >= 0.95);

  cfg.epochs = 5;
  CHECK(train_bbb(ds, arch, cfg) == train_bbb(ds, arch, cfg));
  cfg.label_mode = LabelMode::resample;
  CHECK(train_bbb(ds, arch, cfg) == train_bbb(ds, arch, cfg));
  cfg.resample_scope = ResampleScope::per_batch;
  CHECK(train_bbb(ds, arch, cfg) == train_bbb(ds, arch, cfg));
}

TEST_CASE("train_bbb rejects degenerate input") {
  SoftLabeledDataset one;
  one.ids = {"a", "b"};
  one.features = Tensor({2, 1}, {0.0, 1.0});
  one.soft_labels = Tensor({2, 1}, {1.0, 1.0});
  CHECK_THROWS_AS(train_bbb(one, Architecture({1, 1}), TrainConfig{}), Error);

  Rng rng(0);
  const SoftLabeledDataset ds = synth_blobs(2, 2, 5, 3.0, rng);
  CHECK_THROWS_AS(train_bbb(ds, Architecture({3, 2}), TrainConfig{}), ShapeError);
  TrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(train_bbb(ds, Architecture({2, 2}), bad), UsageError);
}

TEST_CASE("divergent training reports the epoch") {
  Rng rng(0);
  const SoftLabeledDataset ds = synth_blobs(2, 2, 50, 3.0, rng);
  TrainConfig cfg;
  cfg.lr = 1e6;
  cfg.momentum = 0.99;
  try {
    train_bbb(ds, Architecture({2, 8, 2}), cfg);
    FAIL("expected divergence");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.epoch() < cfg.epochs);
  }
}

TEST_CASE("posterior_predictive examples") {
  Architecture arch({2, 3, 2});
  Rng rng(8);
  VariationalParams theta = init_variational(arch, rng);
  Tensor x = Tensor::matrix(4, 2);
  for (double& v : x.values()) v = standard_normal(rng);

  VariationalParams tight = theta;
  for (auto& e : tight.rho)
    for (double& r : e.value.values()) r = inverse_softplus(1e-14);
  Rng a(1);
  const Tensor p = posterior_predictive(tight, arch, x, 7, a);
  const Tensor logits = mlp_forward(theta.mu, x, arch);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto s = softmax(logits.row(r));
    for (std::size_t c = 0; c < 2; ++c) CHECK(p(r, c) == Approx(s[c]).epsilon(1e-12));
  }

  Rng b(3), c(3);
  CHECK(posterior_predictive(theta, arch, x, 1, b) == posterior_predictive(theta, arch, x, 1, c));

  for (std::size_t s : {1u, 2u, 5u, 40u}) {
    const Tensor q = posterior_predictive(theta, arch, x, s, b);
    for (std::size_t r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (double v : q.row(r)) sum += v;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  CHECK_THROWS(posterior_predictive(theta, arch, x, 0, b));
}

TEST_CASE("mirror-symmetric network predicts one half on average") {
  // Both output rows share one distribution, so the classes are exchangeable.
  Architecture arch({1, 2});
  const VariationalParams theta = constant_theta(arch, 0.3, 1.0);
  Rng rng(42);
  const Tensor p = posterior_predictive(theta, arch, Tensor({1, 1}, {0.8}), 10000, rng);
  CHECK(std::abs(p(0, 0) - 0.5) <= 0.02);
  CHECK(std::abs(p(0, 1) - 0.5) <= 0.02);
}

TEST_CASE("export_weight_stats examples") {
  Architecture arch({2, 3, 2});
  const auto flat = export_weight_stats(constant_theta(arch, 0.0, 0.1), arch);
  REQUIRE(flat.size() == 2);
  for (const auto& r : flat) {
    CHECK(r.mean_abs_mu == 0.0);
    CHECK(r.mean_sd == Approx(0.1).epsilon(1e-12));
  }
  CHECK(flat[0].layer == "layer0");
  CHECK(flat[0].histogram[33] == 9);

  Architecture tiny({1, 2});
  VariationalParams t = constant_theta(tiny, 0.0, 0.5);
  t.mu.at("W0")[0] = -1.0;
  t.mu.at("W0")[1] = 1.0;
  t.mu.at("b0")[0] = -1.0;
  t.mu.at("b0")[1] = 1.0;
  const auto rows = export_weight_stats(t, tiny);
  CHECK(rows[0].mean_abs_mu == 1.0);
  CHECK(rows[0].mean_sd == Approx(0.5).epsilon(1e-12));

  t.mu.at("W0")[0] = -3.5;
  t.mu.at("W0")[1] = 3.0;
  t.mu.at("b0")[0] = -3.0;
  t.mu.at("b0")[1] = 9.0;
  const auto edges = export_weight_stats(t, tiny)[0].histogram;
  CHECK(edges[0] == 1);
  CHECK(edges[1] == 1);
  CHECK(edges[64] == 1);
  CHECK(edges[65] == 1);

  std::ostringstream csv;
  write_weight_stats_csv(rows, csv);
  std::string header;
  std::getline(std::istringstream(csv.str()) >> std::ws, header);
  CHECK(header.rfind("layer,mean_abs_mu,mean_sd,bin_0,bin_1,", 0) == 0);
  CHECK(header.size() >= 7);
  CHECK(header.substr(header.size() - 7) == ",bin_65");
}
