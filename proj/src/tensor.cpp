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

#include "seqforge/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace seqforge::kernels {

void gemv_add(const Matrix& w, std::span<const double> x, std::span<double> y) {
  assert(x.size() == w.cols() && y.size() == w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) y[r] += dot(w.row(r), x);
}

void gemv_transposed_add(const Matrix& w, std::span<const double> y, std::span<double> x) {
  assert(x.size() == w.cols() && y.size() == w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (y[r] != 0.0) axpy(y[r], w.row(r), x);
  }
}

void outer_add(std::span<const double> y, std::span<const double> x, Matrix& w) {
  assert(x.size() == w.cols() && y.size() == w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (y[r] != 0.0) axpy(y[r], x, w.row(r));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void axpy(double scale, std::span<const double> b, std::span<double> a) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace seqforge::kernels
