// Copyright 2026 The SeqForge Authors
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace seqforge {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense linear-algebra kernels used by the network.
namespace kernels {

// y += W x
void gemv_add(const Matrix& w, std::span<const double> x, std::span<double> y);
// x += W^T y
void gemv_transposed_add(const Matrix& w, std::span<const double> y, std::span<double> x);
// W += y x^T
void outer_add(std::span<const double> y, std::span<const double> x, Matrix& w);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
// a += scale * b
void axpy(double scale, std::span<const double> b, std::span<double> a);

double log_sum_exp(std::span<const double> values);

}  // namespace kernels
}  // namespace seqforge
