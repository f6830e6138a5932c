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

#include "softev/diff_engine.hpp"
#include "softev/error.hpp"
#include "softev/random.hpp"

using namespace softev;
using doctest::Approx;

namespace {

ParameterSet random_parameters(const Architecture& arch, Rng& rng) {
  ParameterSet p = zero_parameters(arch);
  for (auto& e : p)
    for (double& v : e.value.values()) v = standard_normal(rng);
  return p;
}

std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  double s = 0.0;
  for (double& v : p) s += (v = uniform01(rng) + 1e-3);
  for (double& v : p) v /= s;
  return p;
}

double batch_loss(const ParameterSet& p, const Architecture& arch, const Tensor& x, const Tensor& targets) {
  const Tensor logits = mlp_forward(p, x, arch);
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) total += soft_cross_entropy(logits.row(r), targets.row(r)).value;
  return total;
}

}  // namespace

TEST_CASE("mlp_forward examples") {
  Architecture linear({2, 2});
  ParameterSet p = zero_parameters(linear);
  p.at("W0")(0, 0) = 1.0;
  p.at("W0")(1, 1) = 1.0;
  const Tensor out = mlp_forward(p, Tensor({2}, {1.0, -1.0}), linear);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == -1.0);

  Architecture deep({3, 5, 4});
  const Tensor zeros = mlp_forward(zero_parameters(deep), Tensor({3}, {0.3, -2.0, 7.0}), deep);
  for (double v : zeros.values()) CHECK(v == 0.0);

  Architecture one({1, 1, 1});
  ParameterSet q = zero_parameters(one);
  q.at("W0")[0] = 2.0;
  q.at("W1")[0] = 3.0;
  CHECK(mlp_forward(q, Tensor({1}, {-1.0}), one)[0] == 0.0);
  CHECK(mlp_forward(q, Tensor({1}, {1.0}), one)[0] == 6.0);
}

TEST_CASE("mlp_forward shape and value errors") {
  Architecture arch({2, 3, 2});
  const ParameterSet p = zero_parameters(arch);
  CHECK_THROWS_AS(mlp_forward(p, Tensor({3}, 0.0), arch), ShapeError);
  CHECK_THROWS_AS(mlp_forward(zero_parameters(Architecture({2, 2})), Tensor({2}, 0.0), arch), ShapeError);
  CHECK_THROWS_AS(mlp_forward(p, Tensor({2}, {NAN, 0.0}), arch), NumericError);
  CHECK_THROWS_AS(Architecture({4}), ShapeError);
}

TEST_CASE("parameter layout") {
  Architecture arch({8, 32, 4});
  CHECK(arch.parameter_count() == 8 * 32 + 32 + 32 * 4 + 4);
  const auto layout = arch.parameter_layout();
  REQUIRE(layout.size() == 4);
  CHECK(layout[0].first == "W0");
  CHECK(layout[0].second == std::vector<std::size_t>{32, 8});
  CHECK(layout[3].first == "b1");
}

TEST_CASE("soft_cross_entropy examples") {
  CHECK(soft_cross_entropy(std::vector<double>{0, 0}, std::vector<double>{1, 0}).value ==
        Approx(std::log(2.0)).epsilon(1e-12));
  std::vector<double> ten(10, 0.0), onehot(10, 0.0);
  onehot[3] = 1.0;
  CHECK(soft_cross_entropy(ten, onehot).value == Approx(2.302585).epsilon(1e-6));

  // Independent scalar computation.
  const double sigma = std::exp(1.0) / (1.0 + std::exp(1.0));
  const double oracle = 0.8 * -std::log(sigma) + 0.2 * -std::log(1.0 - sigma);
  const auto l = soft_cross_entropy(std::vector<double>{1, 0}, std::vector<double>{0.8, 0.2});
  CHECK(l.value == Approx(oracle).epsilon(1e-12));
  CHECK(l.value == Approx(0.5130).epsilon(1e-3));
  CHECK(l.grad[0] == Approx(sigma - 0.8).epsilon(1e-12));
  CHECK(l.grad[1] == Approx(1.0 - sigma - 0.2).epsilon(1e-12));

  CHECK_THROWS_AS(soft_cross_entropy(std::vector<double>{INFINITY, 0}, std::vector<double>{1, 0}), NumericError);
  CHECK_THROWS_AS(soft_cross_entropy(std::vector<double>{0, 0, 0}, std::vector<double>{1, 0}), ShapeError);
}

TEST_CASE("gaussian_log_pdf examples") {
  const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);
  CHECK(gaussian_log_pdf(0, 0, 1) == Approx(-0.9189).epsilon(1e-4));
  CHECK(gaussian_log_pdf(1, 0, 1) == Approx(-1.4189).epsilon(1e-4));
  CHECK(gaussian_log_pdf(2, 1, 0.5) == Approx(-half_log_2pi - std::log(0.5) - 2.0).epsilon(1e-12));
  CHECK(gaussian_log_pdf(2, 1, 0.5) == Approx(-2.2258).epsilon(1e-4));
  CHECK_THROWS_AS(gaussian_log_pdf(0, 0, 0), DomainError);
  CHECK_THROWS_AS(gaussian_log_pdf(0, 0, -1), DomainError);
}

TEST_CASE("sgd_step examples") {
  Architecture arch({1, 1});
  ParameterSet p = zero_parameters(arch);
  p.at("W0")[0] = 1.0;
  GradientSet g = GradientSet::like(p);
  g.at("W0")[0] = 0.5;
  GradientSet state = GradientSet::like(p);
  sgd_step(p, g, 0.1, 0.0, state);
  CHECK(p.at("W0")[0] == Approx(0.95).epsilon(1e-15));

  const ParameterSet before = p;
  GradientSet zero = GradientSet::like(p);
  GradientSet state0 = GradientSet::like(p);
  sgd_step(p, zero, 0.1, 0.9, state0);
  CHECK(p == before);

  ParameterSet m = zero_parameters(arch);
  GradientSet one = GradientSet::like(m, 1.0);
  GradientSet st = GradientSet::like(m);
  sgd_step(m, one, 0.1, 0.9, st);
  CHECK(m.at("W0")[0] == Approx(-0.1).epsilon(1e-12));
  sgd_step(m, one, 0.1, 0.9, st);
  CHECK(m.at("W0")[0] == Approx(-0.29).epsilon(1e-12));

  CHECK_THROWS_AS(sgd_step(m, one, 0.0, 0.9, st), DomainError);
  CHECK_THROWS_AS(sgd_step(m, one, 0.1, 1.0, st), DomainError);
  GradientSet wrong = GradientSet::like(zero_parameters(Architecture({2, 1})));
  CHECK_THROWS_AS(sgd_step(m, wrong, 0.1, 0.0, st), ShapeError);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(3);
  const std::vector<std::vector<std::size_t>> shapes{{3, 4}, {3, 5, 4}, {2, 6, 5, 3}, {4, 7, 7, 3}};
  for (int trial = 0; trial < 40; ++trial) {
    const Architecture arch(shapes[trial % shapes.size()]);
    REQUIRE(arch.parameter_count() <= 200);
    ParameterSet p = random_parameters(arch, rng);
    const std::size_t batch = 3;
    Tensor x = Tensor::matrix(batch, arch.input_dim());
    for (double& v : x.values()) v = standard_normal(rng);
    Tensor targets = Tensor::matrix(batch, arch.output_dim());
    for (std::size_t r = 0; r < batch; ++r) {
      const auto t = random_simplex(arch.output_dim(), rng);
      std::copy(t.begin(), t.end(), targets.row(r).begin());
    }

    ForwardTrace trace;
    const Tensor logits = mlp_forward(p, x, arch, &trace);
    Tensor dlogits(logits.shape());
    for (std::size_t r = 0; r < batch; ++r) {
      const auto l = soft_cross_entropy(logits.row(r), targets.row(r));
      std::copy(l.grad.begin(), l.grad.end(), dlogits.row(r).begin());
    }
    const GradientSet g = mlp_backward(p, arch, trace, dlogits);
    REQUIRE(g.same_layout(p));

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
      for (std::size_t i = 0; i < p[t].value.size(); ++i) {
        double& w = p[t].value[i];
        const double saved = w;
        w = saved + h;
        const double up = batch_loss(p, arch, x, targets);
        w = saved - h;
        const double down = batch_loss(p, arch, x, targets);
        w = saved;
        const double fd = (up - down) / (2 * h);
        const double an = g[t].value[i];
        const double rel = std::abs(fd - an) / std::max(1e-6, std::max(std::abs(fd), std::abs(an)));
        // Kinks of the rectifier make a few coordinates non-differentiable.
        if (std::abs(fd - an) > 1e-7) worst = std::max(worst, rel);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("log_softmax normalises and is shift invariant") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(2 + trial % 9);
    for (double& v : logits) v = 10.0 * standard_normal(rng);
    const auto ls = log_softmax(logits);
    double s = 0.0;
    for (double v : ls) s += std::exp(v);
    CHECK(std::abs(s - 1.0) <= 1e-9);
    const double shift = 100.0 * standard_normal(rng);
    std::vector<double> shifted = logits;
    for (double& v : shifted) v += shift;
    const auto ls2 = log_softmax(shifted);
    for (std::size_t i = 0; i < ls.size(); ++i) CHECK(std::abs(ls[i] - ls2[i]) <= 1e-9);
  }
}

TEST_CASE("cross-entropy is bounded below by the target entropy") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 2 + trial % 6;
    const auto target = random_simplex(c, rng);
    std::vector<double> logits(c);
    for (double& v : logits) v = 3.0 * standard_normal(rng);
    CHECK(soft_cross_entropy(logits, target).value >= entropy(target) - 1e-9);

    std::vector<double> matched(c);
    for (std::size_t i = 0; i < c; ++i) matched[i] = std::log(target[i]) + 1.7;
    CHECK(std::abs(soft_cross_entropy(matched, target).value - entropy(target)) <= 1e-9);
  }
}
