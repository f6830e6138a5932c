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


#include "softev/jeffrey.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include "softev/error.hpp"

namespace softev {

namespace {

void check_probabilities(std::span<const double> v, const char* what) {
  if (v.empty()) throw DomainError(std::string(what) + " is empty");
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError(std::string(what) + " has a negative or non-finite entry");
    s += x;
  }
  if (std::abs(s - 1.0) > kProbabilityTolerance)
    throw DomainError(std::string(what) + " sums to " + std::to_string(s) + ", not 1");
}

void check_constraint(const JointTable& joint, const DiscreteDistribution& constraint) {
  if (constraint.size() != joint.events())
    throw ShapeError("constraint has " + std::to_string(constraint.size()) + " entries, joint has " +
                     std::to_string(joint.events()) + " events");
  for (std::size_t i = 0; i < joint.events(); ++i)
    if (constraint[i] > 0.0 && joint.event_mass(i) <= 0.0)
      throw DegenerateEvidenceError("soft evidence puts mass " + std::to_string(constraint[i]) + " on event " +
                                    std::to_string(i) + ", which has zero prior mass");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  check_probabilities(probs_, "distribution");
}

double DiscreteDistribution::sum() const noexcept { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

JointTable::JointTable(std::size_t alpha_outcomes, std::size_t events, std::vector<double> row_major)
    : alpha_(alpha_outcomes), events_(events), cells_(std::move(row_major)) {
  if (alpha_ == 0 || events_ == 0) throw ShapeError("joint table must have at least one row and one column");
  if (cells_.size() != alpha_ * events_) throw ShapeError("joint table cell count does not match its dimensions");
  check_probabilities(cells_, "joint table");
}

JointTable JointTable::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("joint table has no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> cells;
  cells.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("joint table rows have different lengths");
    cells.insert(cells.end(), r.begin(), r.end());
  }
  return JointTable(rows.size(), cols, std::move(cells));
}

double JointTable::event_mass(std::size_t event) const {
  if (event >= events_) throw BoundsError("event index " + std::to_string(event) + " out of range");
  double s = 0.0;
  for (std::size_t a = 0; a < alpha_; ++a) s += (*this)(a, event);
  return s;
}

DiscreteDistribution JointTable::event_marginal() const {
  std::vector<double> m(events_);
  for (std::size_t i = 0; i < events_; ++i) m[i] = event_mass(i);
  return DiscreteDistribution(std::move(m));
}

DiscreteDistribution JointTable::alpha_marginal() const {
  std::vector<double> m(alpha_, 0.0);
  for (std::size_t a = 0; a < alpha_; ++a)
    for (std::size_t i = 0; i < events_; ++i) m[a] += (*this)(a, i);
  return DiscreteDistribution(std::move(m));
}

DiscreteDistribution hard_condition(const JointTable& joint, std::size_t event) {
  const double mass = joint.event_mass(event);
  if (mass <= 0.0) throw DegenerateEvidenceError("cannot condition on zero-mass event " + std::to_string(event));
  std::vector<double> out(joint.alpha_outcomes());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = joint(a, event) / mass;
  return DiscreteDistribution(std::move(out));
}

JointTable kinematics_update(const JointTable& joint, const DiscreteDistribution& constraint) {
  check_constraint(joint, constraint);
  std::vector<double> cells(joint.cells().size(), 0.0);
  for (std::size_t i = 0; i < joint.events(); ++i) {
    if (constraint[i] <= 0.0) continue;
    const double scale = constraint[i] / joint.event_mass(i);
    for (std::size_t a = 0; a < joint.alpha_outcomes(); ++a)
      cells[a * joint.events() + i] = joint(a, i) * scale;
  }
  return JointTable(joint.alpha_outcomes(), joint.events(), std::move(cells));
}

JeffreyPosterior jeffrey_update(const JointTable& joint, const DiscreteDistribution& constraint) {
  check_constraint(joint, constraint);
  std::vector<double> j(joint.alpha_outcomes(), 0.0);
  for (std::size_t i = 0; i < joint.events(); ++i) {
    if (constraint[i] <= 0.0) continue;
    const DiscreteDistribution cond = hard_condition(joint, i);
    for (std::size_t a = 0; a < j.size(); ++a) j[a] += cond[a] * constraint[i];
  }
  return {DiscreteDistribution(std::move(j)), constraint};
}

double kl_divergence(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw ShapeError("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return kInfiniteDivergence;
    kl += q[i] * std::log(q[i] / p[i]);
  }
  // Rounding can leave a tiny negative value for (nearly) identical inputs.
  return kl < 0.0 ? 0.0 : kl;
}

double kl_divergence(const DiscreteDistribution& q, const DiscreteDistribution& p) {
  return kl_divergence(q.probs(), p.probs());
}

namespace {

constexpr std::size_t kMaxOracleCells = 16;
constexpr std::size_t kMaxLatticePoints = 50'000'000;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Best lattice point (counts summing to `resolution`) for min_c KL(c || p).
std::vector<std::size_t> best_lattice_conditional(std::span<const double> p, std::size_t resolution) {
  const std::size_t m = p.size();
  const double res = static_cast<double>(resolution);
  // cost[k][n] = (n/res) log((n/res) / p_k); infinite when p_k = 0 < n.
  std::vector<std::vector<double>> cost(m, std::vector<double>(resolution + 1, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t n = 1; n <= resolution; ++n) {
      const double c = static_cast<double>(n) / res;
      cost[k][n] = p[k] > 0.0 ? c * std::log(c / p[k]) : kInfiniteDivergence;
    }
  }

  std::vector<std::size_t> counts(m, 0), best(m, 0);
  double best_cost = kInfiniteDivergence;
  bool found = false;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t k, std::size_t left, double acc) {
    if (k + 1 == m) {
      counts[k] = left;
      const double total = acc + cost[k][left];
      if (!found || total < best_cost) {
        best_cost = total;
        best = counts;
        found = true;
      }
      return;
    }
    for (std::size_t n = 0; n <= left; ++n) {
      counts[k] = n;
      walk(k + 1, left - n, acc + cost[k][n]);
    }
  };
  walk(0, resolution, 0.0);
  return best;
}

// Alternating column rescaling towards the gamma-marginal `target`.
std::vector<double> proportional_fit(const JointTable& joint, const DiscreteDistribution& target) {
  const std::size_t rows = joint.alpha_outcomes(), cols = joint.events();
  std::vector<double> q(joint.cells().begin(), joint.cells().end());
  for (int iter = 0; iter < 100; ++iter) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
      double mass = 0.0;
      for (std::size_t a = 0; a < rows; ++a) mass += q[a * cols + i];
      worst = std::max(worst, std::abs(mass - target[i]));
      const double scale = target[i] > 0.0 ? target[i] / mass : 0.0;
      for (std::size_t a = 0; a < rows; ++a) q[a * cols + i] *= scale;
    }
    if (worst < 1e-15) break;
  }
  return q;
}

}  // namespace

DiscreteDistribution kl_minimizing_oracle(const JointTable& joint, const DiscreteDistribution& constraint,
                                          std::size_t resolution) {
  if (joint.alpha_outcomes() * joint.events() > kMaxOracleCells)
    throw UsageError("kl_minimizing_oracle supports at most 16 joint cells");
  if (resolution < 100) throw UsageError("kl_minimizing_oracle needs resolution >= 100");
  if (binomial(resolution + joint.alpha_outcomes() - 1, joint.alpha_outcomes() - 1) > kMaxLatticePoints)
    throw UsageError("lattice too large for kl_minimizing_oracle; lower the resolution");
  check_constraint(joint, constraint);

  const std::size_t rows = joint.alpha_outcomes(), cols = joint.events();
  std::vector<double> lattice_joint(rows * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    if (constraint[i] <= 0.0) continue;
    const double mass = joint.event_mass(i);
    std::vector<double> cond(rows);
    for (std::size_t a = 0; a < rows; ++a) cond[a] = joint(a, i) / mass;
    const auto counts = best_lattice_conditional(cond, resolution);
    for (std::size_t a = 0; a < rows; ++a)
      lattice_joint[a * cols + i] = constraint[i] * static_cast<double>(counts[a]) / static_cast<double>(resolution);
  }

  const std::vector<double> fitted = proportional_fit(joint, constraint);
  const double lattice_kl = kl_divergence(lattice_joint, joint.cells());
  const double fitted_kl = kl_divergence(fitted, joint.cells());
  if (lattice_kl < fitted_kl - 1e-9)
    throw std::logic_error("kl_minimizing_oracle: lattice search beat proportional fitting (" +
                           std::to_string(lattice_kl) + " < " + std::to_string(fitted_kl) + ")");

  std::vector<double> marginal(rows, 0.0);
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t i = 0; i < cols; ++i) marginal[a] += lattice_joint[a * cols + i];
  return DiscreteDistribution(std::move(marginal));
}

}  // namespace softev
