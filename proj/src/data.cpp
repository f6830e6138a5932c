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


#include "softev/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "softev/error.hpp"

namespace softev {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t row, const char* what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw DataError(std::string("cannot parse ") + what + " '" + s + "'", row);
  return v;
}

std::size_t parse_index(const std::string& s, std::size_t row, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DataError(std::string("cannot parse ") + what + " '" + s + "'", row);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Counts a run of columns named <prefix>0, <prefix>1, ... starting at `pos`.
std::size_t count_prefixed(const std::vector<std::string>& header, std::size_t pos, const std::string& prefix) {
  std::size_t n = 0;
  while (pos + n < header.size() && header[pos + n] == prefix + std::to_string(n)) ++n;
  return n;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

void SoftLabeledDataset::validate() const {
  if (soft_labels.rank() != 2 || features.rank() != 2) throw DataError("dataset tensors must be matrices");
  const std::size_t n = soft_labels.rows();
  if (features.rows() != n) throw DataError("feature and label row counts differ");
  if (classes() < 2) throw DataError("a dataset needs at least two classes");
  if (!ids.empty() && ids.size() != n) throw DataError("id count does not match row count");
  if (true_labels && true_labels->size() != n) throw DataError("true label count does not match row count");
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (double p : soft_labels.row(r)) {
      if (!std::isfinite(p) || p < 0.0) throw DataError("negative or non-finite label probability", r + 1);
      s += p;
    }
    if (std::abs(s - 1.0) > kRowSumTolerance) throw DataError("label row sums to " + format_double(s), r + 1);
    for (double f : features.row(r))
      if (!std::isfinite(f)) throw DataError("non-finite feature", r + 1);
    if (true_labels && (*true_labels)[r] >= classes()) throw DataError("true label out of range", r + 1);
  }
}

SoftLabeledDataset parse_soft_csv(std::istream& in, Split split) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty soft-label CSV");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") throw DataError("soft-label CSV header must start with 'id'");
  const std::size_t d = count_prefixed(header, 1, "f_");
  const std::size_t c = count_prefixed(header, 1 + d, "p_");
  const std::size_t base = 1 + d + c;
  bool has_truth = false;
  if (header.size() == base + 1 && header[base] == "true_label") {
    has_truth = true;
  } else if (header.size() != base) {
    throw DataError("unexpected soft-label CSV column '" + header[base] + "'");
  }
  if (c < 2) throw DataError("soft-label CSV needs at least two p_ columns");

  std::vector<std::string> ids;
  std::vector<double> feats, labels;
  std::vector<std::size_t> truth;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " columns, found " +
                          std::to_string(cells.size()),
                      row);
    ids.push_back(cells[0]);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = parse_double(cells[1 + j], row, "feature");
      if (!std::isfinite(v)) throw DataError("non-finite feature", row);
      feats.push_back(v);
    }
    double sum = 0.0;
    std::vector<double> p(c);
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = parse_double(cells[1 + d + j], row, "probability");
      if (!std::isfinite(p[j]) || p[j] < 0.0) throw DataError("negative or non-finite probability", row);
      sum += p[j];
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw DataError("label row sums to " + format_double(sum) + ", outside 1 +/- 1e-6", row);
    if (sum != 1.0)
      for (double& v : p) v /= sum;
    labels.insert(labels.end(), p.begin(), p.end());
    if (has_truth) {
      const std::size_t t = parse_index(cells[base], row, "true_label");
      if (t >= c) throw DataError("true_label out of range", row);
      truth.push_back(t);
    }
  }

  SoftLabeledDataset ds;
  ds.ids = std::move(ids);
  ds.features = Tensor({row, d}, std::move(feats));
  ds.soft_labels = Tensor({row, c}, std::move(labels));
  if (has_truth) ds.true_labels = std::move(truth);
  ds.split = split;
  return ds;
}

SoftLabeledDataset load_soft_csv(const std::filesystem::path& path, Split split) {
  auto in = open_input(path);
  return parse_soft_csv(in, split);
}

void write_soft_csv(const SoftLabeledDataset& ds, std::ostream& out) {
  const std::size_t d = ds.dims(), c = ds.classes();
  out << "id";
  for (std::size_t j = 0; j < d; ++j) out << ",f_" << j;
  for (std::size_t j = 0; j < c; ++j) out << ",p_" << j;
  if (ds.true_labels) out << ",true_label";
  out << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    out << (ds.ids.empty() ? std::to_string(r) : ds.ids[r]);
    for (double v : ds.features.row(r)) out << ',' << format_double(v);
    for (double v : ds.soft_labels.row(r)) out << ',' << format_double(v);
    if (ds.true_labels) out << ',' << (*ds.true_labels)[r];
    out << '\n';
  }
}

void save_soft_csv(const SoftLabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_soft_csv(ds, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

AnnotationSet parse_annotations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty annotation CSV");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"item_id", "annotator_id", "label"})
    throw DataError("annotation CSV header must be 'item_id,annotator_id,label'");
  AnnotationSet out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw DataError("expected 3 columns", row);
    out.push_back({cells[0], cells[1], parse_index(cells[2], row, "label")});
  }
  return out;
}

AnnotationSet load_annotations_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_annotations_csv(in);
}

SoftLabeledDataset aggregate_annotations(const AnnotationSet& annotations, std::size_t classes) {
  if (classes < 2) throw DataError("aggregation needs at least two classes");
  std::map<std::string, std::vector<std::size_t>> counts;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    if (a.label >= classes) throw DataError("annotation label out of range", i + 1);
    auto& row = counts[a.item_id];
    row.resize(classes, 0);
    ++row[a.label];
  }
  if (counts.empty()) throw DataError("no annotations to aggregate");

  SoftLabeledDataset ds;
  ds.features = Tensor::matrix(counts.size(), 0);
  ds.soft_labels = Tensor::matrix(counts.size(), classes);
  std::size_t r = 0;
  for (const auto& [id, row] : counts) {
    const double total = static_cast<double>(std::accumulate(row.begin(), row.end(), std::size_t{0}));
    if (total == 0.0) throw DataError("item '" + id + "' has no annotations");
    for (std::size_t c = 0; c < classes; ++c) ds.soft_labels(r, c) = static_cast<double>(row[c]) / total;
    ds.ids.push_back(id);
    ++r;
  }
  return ds;
}

SoftLabeledDataset join_features(const SoftLabeledDataset& labels, const SoftLabeledDataset& features) {
  if (features.ids.size() != features.rows()) throw DataError("feature source has no ids to join on");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < features.rows(); ++r) index.emplace(features.ids[r], r);
  SoftLabeledDataset out = labels;
  const std::size_t d = features.dims();
  out.features = Tensor::matrix(labels.rows(), d);
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    const std::string& id = labels.ids.at(r);
    auto it = index.find(id);
    if (it == index.end()) throw DataError("no features for item '" + id + "'", r + 1);
    std::copy_n(features.features.row(it->second).begin(), d, out.features.row(r).begin());
  }
  if (!out.true_labels && features.true_labels) {
    std::vector<std::size_t> t(labels.rows());
    for (std::size_t r = 0; r < labels.rows(); ++r) t[r] = (*features.true_labels)[index.at(labels.ids[r])];
    out.true_labels = std::move(t);
  }
  return out;
}

double mean_top_vote_share(const SoftLabeledDataset& ds) {
  if (ds.rows() == 0) throw DataError("empty dataset");
  double s = 0.0;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto row = ds.soft_labels.row(r);
    s += *std::max_element(row.begin(), row.end());
  }
  return s / static_cast<double>(ds.rows());
}

SoftLabeledDataset synth_blobs(std::size_t classes, std::size_t dims, std::size_t per_class, double separation,
                               Rng& rng) {
  if (classes < 2) throw UsageError("synth_blobs needs at least two classes");
  if (dims < 1 || per_class < 1) throw UsageError("synth_blobs needs dims >= 1 and per_class >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) throw UsageError("synth_blobs separation must be >= 0");

  Tensor centers = Tensor::matrix(classes, dims);
  if (dims >= classes) {
    for (std::size_t c = 0; c < classes; ++c) centers(c, c) = separation / std::numbers::sqrt2;
  } else if (dims == 1) {
    for (std::size_t c = 0; c < classes; ++c) centers(c, 0) = separation * static_cast<double>(c);
  } else {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(classes)));
    for (std::size_t c = 0; c < classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
      centers(c, 0) = radius * std::cos(angle);
      centers(c, 1) = radius * std::sin(angle);
    }
  }

  const std::size_t n = classes * per_class;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  SoftLabeledDataset ds;
  ds.features = Tensor::matrix(n, dims);
  ds.soft_labels = Tensor::matrix(n, classes);
  std::vector<std::size_t> truth(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = order[r] / per_class;
    truth[r] = c;
    ds.soft_labels(r, c) = 1.0;
    for (std::size_t j = 0; j < dims; ++j) ds.features(r, j) = centers(c, j) + standard_normal(rng);
    ds.ids.push_back(std::to_string(r));
  }
  ds.true_labels = std::move(truth);
  return ds;
}

SoftLabeledDataset corrupt_labels(const SoftLabeledDataset& ds, const CorruptionSpec& spec) {
  if (!ds.true_labels) throw DataError("corrupt_labels needs true labels");
  if (spec.annotators < 1) throw UsageError("corruption needs at least one annotator");
  if (!(spec.error_rate >= 0.0 && spec.error_rate < 1.0)) throw UsageError("error rate must lie in [0, 1)");
  Rng rng(spec.seed);
  const std::size_t c = ds.classes();
  SoftLabeledDataset out = ds;
  std::vector<std::size_t> votes(c);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const std::size_t truth = (*ds.true_labels)[r];
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t a = 0; a < spec.annotators; ++a) {
      if (uniform01(rng) >= spec.error_rate) {
        ++votes[truth];
      } else {
        std::size_t other = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(c - 1));
        if (other >= c - 1) other = c - 2;
        ++votes[other >= truth ? other + 1 : other];
      }
    }
    for (std::size_t k = 0; k < c; ++k)
      out.soft_labels(r, k) = static_cast<double>(votes[k]) / static_cast<double>(spec.annotators);
  }
  return out;
}

}  // namespace softev
