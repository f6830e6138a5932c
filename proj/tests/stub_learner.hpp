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


#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "softev/data.hpp"
#include "softev/methods.hpp"

namespace softev::testing {

// Feature-blind base learner: Laplace-smoothed class frequencies of the
// instantiation's labels.
inline std::vector<double> stub_learner(const DatasetInstantiation& d, std::size_t classes) {
  std::vector<double> p(classes, 1.0);
  for (std::size_t y : d.labels) p[y] += 1.0;
  for (double& v : p) v /= static_cast<double>(d.labels.size() + classes);
  return p;
}

// Exact Jeffrey mixture over every instantiation of the dataset's labels.
inline std::vector<double> enumerated_mixture(const SoftLabeledDataset& ds) {
  const std::size_t n = ds.rows(), c = ds.classes();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= c;
  std::vector<double> mix(c, 0.0);
  for (std::size_t code = 0; code < total; ++code) {
    DatasetInstantiation d;
    double weight = 1.0;
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      d.labels.push_back(rest % c);
      weight *= ds.soft_labels(i, rest % c);
      rest /= c;
    }
    const auto p = stub_learner(d, c);
    for (std::size_t k = 0; k < c; ++k) mix[k] += weight * p[k];
  }
  return mix;
}

inline SoftLabeledDataset enumerable_dataset() {
  SoftLabeledDataset ds;
  ds.ids = {"a", "b", "c"};
  ds.features = Tensor({3, 1}, {0.0, 1.0, 2.0});
  ds.soft_labels = Tensor({3, 2}, {0.9, 0.1, 0.3, 0.7, 0.5, 0.5});
  return ds;
}

// Total variation between the averaged K-member stub ensemble and the mixture.
inline double stub_ensemble_distance(const SoftLabeledDataset& ds, std::size_t K, std::uint64_t seed) {
  const std::size_t c = ds.classes();
  const auto members =
      sparse_k_members(ds, K, seed, [&](const DatasetInstantiation& d, std::uint64_t) { return stub_learner(d, c); });
  std::vector<double> avg(c, 0.0);
  for (const auto& m : members)
    for (std::size_t k = 0; k < c; ++k) avg[k] += m[k] / static_cast<double>(K);
  const auto exact = enumerated_mixture(ds);
  double tv = 0.0;
  for (std::size_t k = 0; k < c; ++k) tv += 0.5 * std::abs(avg[k] - exact[k]);
  return tv;
}

}  // namespace softev::testing
