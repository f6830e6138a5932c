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


// Jeffrey conditionalization on finite discrete distributions.
//
// A JointTable holds P(alpha, gamma) with one row per outcome of alpha and one
// column per event gamma_i of a mutually exclusive, exhaustive partition. Soft
// evidence is a DiscreteDistribution R over the columns.

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace softev {

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

class DiscreteDistribution {
 public:
  // Throws DomainError unless entries are finite, non-negative and sum to one
  // within kProbabilityTolerance.
  explicit DiscreteDistribution(std::vector<double> probs);
  DiscreteDistribution(std::initializer_list<double> probs)
      : DiscreteDistribution(std::vector<double>(probs)) {}

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  double sum() const noexcept;

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

// Zero-mass columns are allowed; operations that need P(alpha | gamma_i) for
// such a column raise DegenerateEvidenceError.
class JointTable {
 public:
  JointTable(std::size_t alpha_outcomes, std::size_t events, std::vector<double> row_major);
  static JointTable from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t alpha_outcomes() const noexcept { return alpha_; }
  std::size_t events() const noexcept { return events_; }
  double operator()(std::size_t alpha, std::size_t event) const { return cells_[alpha * events_ + event]; }
  std::span<const double> cells() const noexcept { return cells_; }

  double event_mass(std::size_t event) const;
  DiscreteDistribution event_marginal() const;
  DiscreteDistribution alpha_marginal() const;

 private:
  std::size_t alpha_;
  std::size_t events_;
  std::vector<double> cells_;
};

struct JeffreyPosterior {
  DiscreteDistribution dist;
  DiscreteDistribution constraint;
};

// P(alpha | gamma_event).
DiscreteDistribution hard_condition(const JointTable& joint, std::size_t event);

// J(alpha) = sum_i P(alpha | gamma_i) R(gamma_i).
JeffreyPosterior jeffrey_update(const JointTable& joint, const DiscreteDistribution& constraint);

// The full updated joint Q(alpha, gamma_i) = P(alpha | gamma_i) R(gamma_i).
// Columns with R(gamma_i) = 0 are zero in Q.
JointTable kinematics_update(const JointTable& joint, const DiscreteDistribution& constraint);

// sum q log(q / p), with 0 log(0 / p) = 0. Returns kInfiniteDivergence when q
// has mass where p has none.
double kl_divergence(std::span<const double> q, std::span<const double> p);
double kl_divergence(const DiscreteDistribution& q, const DiscreteDistribution& p);

// Brute-force minimizer of KL(Q || joint) over joints Q whose gamma-marginal
// equals `constraint`. Each conditional Q(. | gamma_i) is searched over the
// simplex lattice with spacing 1/resolution; the result is the alpha-marginal
// of the best lattice point. The lattice optimum is cross-checked against an
// iterative proportional fitting solution and a std::logic_error is thrown
// if the lattice beats it.
DiscreteDistribution kl_minimizing_oracle(const JointTable& joint, const DiscreteDistribution& constraint,
                                          std::size_t resolution);

}  // namespace softev
