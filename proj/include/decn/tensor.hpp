// Copyright 2026 The DECN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECN_TENSOR_HPP
#define DECN_TENSOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decn/error.hpp"

namespace decn {

/// Extents of a rank 1..3 tensor.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents) {
    if (extents.size() < 1 || extents.size() > 3) {
      throw ShapeError("tensor rank must be between 1 and 3");
    }
    rank_ = extents.size();
    std::copy(extents.begin(), extents.end(), extents_.begin());
    for (std::size_t i = 0; i < rank_; ++i) {
      if (extents_[i] == 0) throw ShapeError("tensor extents must be positive");
    }
  }

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const { return extents_.at(axis); }
  std::size_t size() const {
    std::size_t n = rank_ == 0 ? 0 : 1;
    for (std::size_t i = 0; i < rank_; ++i) n *= extents_[i];
    return n;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < rank_; ++i) {
      if (i) s += ",";
      s += std::to_string(extents_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Shape& a, const Shape& b) {
    if (a.rank_ != b.rank_) return false;
    for (std::size_t i = 0; i < a.rank_; ++i) {
      if (a.extents_[i] != b.extents_[i]) return false;
    }
    return true;
  }

 private:
  std::size_t rank_ = 0;
  std::array<std::size_t, 3> extents_{};
};

/// Dense row-major array of doubles. The last axis is the fastest.
///
/// Lattices are stored as (rows, cols, channels); fitness matrices as
/// (rows, cols); scalars as (1).
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.size(), fill) {}

  Tensor(Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(Shape{n}, std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.rank(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t c) {
    return data_[(i * shape_[1] + j) * shape_[2] + c];
  }
  double at(std::size_t i, std::size_t j, std::size_t c) const {
    return data_[(i * shape_[1] + j) * shape_[2] + c];
  }

  /// Single value of a one-element tensor.
  double item() const {
    if (data_.size() != 1) {
      throw ShapeError("item() on tensor of shape " + shape_.str());
    }
    return data_[0];
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

  Tensor& operator+=(const Tensor& other) {
    require_same_shape(*this, other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

  static void require_same_shape(const Tensor& a, const Tensor& b,
                                 const char* what) {
    if (!(a.shape() == b.shape())) {
      throw ShapeError(std::string(what) + ": shape mismatch " +
                       a.shape().str() + " vs " + b.shape().str());
    }
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  Tensor::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace decn

#endif  // DECN_TENSOR_HPP
