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


// Soft-labeled datasets: CSV ingestion, annotation aggregation, synthetic
// blobs and simulated-annotator label corruption.
//
// Soft-label CSV header: id,f_0,...,f_{d-1},p_0,...,p_{C-1}[,true_label]
// Annotation CSV header: item_id,annotator_id,label

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softev/random.hpp"
#include "softev/tensor.hpp"

namespace softev {

inline constexpr double kRowSumTolerance = 1e-6;

enum class Split { train, test };

struct SoftLabeledDataset {
  std::vector<std::string> ids;
  Tensor features;     // {n, d}
  Tensor soft_labels;  // {n, C}, each row an R(gamma)
  std::optional<std::vector<std::size_t>> true_labels;
  Split split = Split::train;

  std::size_t rows() const { return soft_labels.rows(); }
  std::size_t dims() const { return features.cols(); }
  std::size_t classes() const { return soft_labels.cols(); }

  // Throws DataError if any invariant is broken: C >= 2, row-stochastic
  // labels within 1e-6, finite features, consistent row counts, labels < C.
  void validate() const;

  bool operator==(const SoftLabeledDataset&) const = default;
};

SoftLabeledDataset parse_soft_csv(std::istream& in, Split split = Split::train);
SoftLabeledDataset load_soft_csv(const std::filesystem::path& path, Split split = Split::train);
void write_soft_csv(const SoftLabeledDataset& ds, std::ostream& out);
void save_soft_csv(const SoftLabeledDataset& ds, const std::filesystem::path& path);

struct Annotation {
  std::string item_id;
  std::string annotator_id;
  std::size_t label = 0;
};
using AnnotationSet = std::vector<Annotation>;

AnnotationSet parse_annotations_csv(std::istream& in);
AnnotationSet load_annotations_csv(const std::filesystem::path& path);

// Per-item empirical label frequencies. Items are ordered by id, so the result
// does not depend on record order. The dataset has zero feature columns;
// attach features with join_features.
SoftLabeledDataset aggregate_annotations(const AnnotationSet& annotations, std::size_t classes);

// Copies feature rows from `features` into `labels`, matching on id.
SoftLabeledDataset join_features(const SoftLabeledDataset& labels, const SoftLabeledDataset& features);

// Mean over items of max_c R_i(c).
double mean_top_vote_share(const SoftLabeledDataset& ds);

// Class-conditional unit-variance Gaussians. With d >= C the centers sit on
// scaled coordinate axes (a regular simplex, pairwise distance s); otherwise
// on a line (d = 1) or a regular polygon in the first two coordinates, with
// adjacent centers s apart. Labels are one-hot; rows are shuffled.
SoftLabeledDataset synth_blobs(std::size_t classes, std::size_t dims, std::size_t per_class, double separation,
                               Rng& rng);

struct CorruptionSpec {
  std::size_t annotators = 3;
  double error_rate = 0.0;
  std::uint64_t seed = 0;
};

// Each of A simulated annotators reports the true label with probability
// 1 - error_rate and otherwise a uniformly chosen other class; the soft label
// becomes the empirical annotation frequency.
SoftLabeledDataset corrupt_labels(const SoftLabeledDataset& ds, const CorruptionSpec& spec);

}  // namespace softev
