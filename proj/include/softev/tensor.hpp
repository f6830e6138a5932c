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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "softev/error.hpp"

namespace softev {

// Dense row-major array of 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rank() const noexcept { return shape_.size(); }

  // Rank-2 accessors. Calling them on another rank is a shape error.
  std::size_t rows() const;
  std::size_t cols() const;
  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);
std::string shape_string(const std::vector<std::size_t>& shape);

struct NamedTensor {
  std::string name;
  Tensor value;
  bool operator==(const NamedTensor&) const = default;
};

// Ordered collection of uniquely named tensors. The tag keeps parameter,
// gradient and optimizer-state sets from being mixed up at compile time.
template <class Tag>
class TensorSet {
 public:
  TensorSet() = default;

  void add(std::string name, Tensor value) {
    if (find(name) != nullptr) throw ShapeError("duplicate tensor name '" + name + "'");
    entries_.push_back({std::move(name), std::move(value)});
  }

  const Tensor* find(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e.value;
    return nullptr;
  }
  Tensor* find(std::string_view name) {
    for (auto& e : entries_)
      if (e.name == name) return &e.value;
    return nullptr;
  }
  const Tensor& at(std::string_view name) const {
    const Tensor* t = find(name);
    if (!t) throw ShapeError("missing tensor '" + std::string(name) + "'");
    return *t;
  }
  Tensor& at(std::string_view name) {
    Tensor* t = find(name);
    if (!t) throw ShapeError("missing tensor '" + std::string(name) + "'");
    return *t;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  NamedTensor& operator[](std::size_t i) { return entries_[i]; }
  const NamedTensor& operator[](std::size_t i) const { return entries_[i]; }

  // Total number of scalars across all tensors.
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  // Same names and shapes as `other`, every value set to `fill`.
  template <class OtherTag>
  static TensorSet like(const TensorSet<OtherTag>& other, double fill = 0.0) {
    TensorSet out;
    for (const auto& e : other) out.add(e.name, Tensor(e.value.shape(), fill));
    return out;
  }

  template <class OtherTag>
  bool same_layout(const TensorSet<OtherTag>& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (other[i].name != entries_[i].name || other[i].value.shape() != entries_[i].value.shape())
        return false;
    return true;
  }

  bool operator==(const TensorSet&) const = default;

 private:
  std::vector<NamedTensor> entries_;
};

struct ParameterTag {};
struct GradientTag {};

using ParameterSet = TensorSet<ParameterTag>;
using GradientSet = TensorSet<GradientTag>;

}  // namespace softev
