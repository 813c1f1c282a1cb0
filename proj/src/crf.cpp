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

#include "seqforge/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqforge/error.hpp"

namespace seqforge::crf {
namespace {

void check_shapes(const Matrix& emissions, const Matrix& transitions) {
  const std::size_t k = emissions.cols();
  if (transitions.rows() != k + 2 || transitions.cols() != k + 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "transition matrix is " + std::to_string(transitions.rows()) + "x" +
                    std::to_string(transitions.cols()) + ", expected " + std::to_string(k + 2) +
                    "x" + std::to_string(k + 2));
  }
}

void check_labels(std::span<const int> labels, const Matrix& emissions) {
  if (labels.size() != emissions.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "gold length " + std::to_string(labels.size()) +
                                               " != sentence length " +
                                               std::to_string(emissions.rows()));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= emissions.cols()) {
      throw Error(ErrorCode::kLabelOutOfRange, "label index " + std::to_string(y) +
                                                   " outside [0," +
                                                   std::to_string(emissions.cols()) + ")");
    }
  }
}

}  // namespace

void mask_unused_transitions(Matrix& transitions) {
  const std::size_t n = transitions.rows();
  if (n < 2) return;
  const std::size_t k = n - 2;
  for (std::size_t i = 0; i < n; ++i) {
    transitions(i, start_state(k)) = 0.0;
    transitions(end_state(k), i) = 0.0;
  }
  transitions(start_state(k), end_state(k)) = 0.0;
}

double sequence_score(const Matrix& emissions, const Matrix& transitions,
                      std::span<const int> labels) {
  check_shapes(emissions, transitions);
  check_labels(labels, emissions);
  const std::size_t k = emissions.cols();
  const std::size_t t_len = labels.size();
  if (t_len == 0) return 0.0;
  double s = transitions(start_state(k), labels[0]);
  for (std::size_t t = 0; t < t_len; ++t) {
    s += emissions(t, labels[t]);
    if (t > 0) s += transitions(labels[t - 1], labels[t]);
  }
  s += transitions(labels[t_len - 1], end_state(k));
  return s;
}

Lattice forward_backward(const Matrix& emissions, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t t_len = emissions.rows();
  const std::size_t k = emissions.cols();
  Lattice lat{Matrix(t_len, k), Matrix(t_len, k), 0.0};
  if (t_len == 0) return lat;

  std::vector<double> scratch(k);
  for (std::size_t y = 0; y < k; ++y) {
    lat.alpha(0, y) = transitions(start_state(k), y) + emissions(0, y);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t prev = 0; prev < k; ++prev) {
        scratch[prev] = lat.alpha(t - 1, prev) + transitions(prev, y);
      }
      lat.alpha(t, y) = kernels::log_sum_exp(scratch) + emissions(t, y);
    }
  }
  for (std::size_t y = 0; y < k; ++y) {
    scratch[y] = lat.alpha(t_len - 1, y) + transitions(y, end_state(k));
  }
  lat.log_partition = kernels::log_sum_exp(scratch);

  for (std::size_t y = 0; y < k; ++y) lat.beta(t_len - 1, y) = transitions(y, end_state(k));
  for (std::size_t t = t_len - 1; t-- > 0;) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t next = 0; next < k; ++next) {
        scratch[next] = transitions(y, next) + emissions(t + 1, next) + lat.beta(t + 1, next);
      }
      lat.beta(t, y) = kernels::log_sum_exp(scratch);
    }
  }
  return lat;
}

NllResult negative_log_likelihood(const Matrix& emissions, const Matrix& transitions,
                                  std::span<const int> gold) {
  check_shapes(emissions, transitions);
  check_labels(gold, emissions);
  const std::size_t t_len = emissions.rows();
  const std::size_t k = emissions.cols();
  NllResult out{0.0, Matrix(t_len, k), Matrix(k + 2, k + 2)};
  if (t_len == 0) return out;

  const Lattice lat = forward_backward(emissions, transitions);
  const double log_z = lat.log_partition;
  // Rounding can push a near-certain path a hair below zero.
  out.loss = std::max(0.0, log_z - sequence_score(emissions, transitions, gold));

  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      out.emission_grad(t, y) = std::exp(lat.alpha(t, y) + lat.beta(t, y) - log_z);
    }
  }
  for (std::size_t y = 0; y < k; ++y) {
    out.transition_grad(start_state(k), y) = out.emission_grad(0, y);
    out.transition_grad(y, end_state(k)) = out.emission_grad(t_len - 1, y);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t prev = 0; prev < k; ++prev) {
      for (std::size_t y = 0; y < k; ++y) {
        out.transition_grad(prev, y) += std::exp(lat.alpha(t - 1, prev) + transitions(prev, y) +
                                                 emissions(t, y) + lat.beta(t, y) - log_z);
      }
    }
  }

  for (std::size_t t = 0; t < t_len; ++t) out.emission_grad(t, gold[t]) -= 1.0;
  out.transition_grad(start_state(k), gold[0]) -= 1.0;
  out.transition_grad(gold[t_len - 1], end_state(k)) -= 1.0;
  for (std::size_t t = 1; t < t_len; ++t) out.transition_grad(gold[t - 1], gold[t]) -= 1.0;
  return out;
}

Decoded viterbi_decode(const Matrix& emissions, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t t_len = emissions.rows();
  const std::size_t k = emissions.cols();
  Decoded out;
  if (t_len == 0) return out;

  Matrix delta(t_len, k);
  std::vector<int> backpointer(t_len * k, 0);
  for (std::size_t y = 0; y < k; ++y) {
    delta(0, y) = transitions(start_state(k), y) + emissions(0, y);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int best_prev = 0;
      for (std::size_t prev = 0; prev < k; ++prev) {
        const double s = delta(t - 1, prev) + transitions(prev, y);
        if (s > best) {
          best = s;
          best_prev = static_cast<int>(prev);
        }
      }
      delta(t, y) = best + emissions(t, y);
      backpointer[t * k + y] = best_prev;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  int last = 0;
  for (std::size_t y = 0; y < k; ++y) {
    const double s = delta(t_len - 1, y) + transitions(y, end_state(k));
    if (s > best) {
      best = s;
      last = static_cast<int>(y);
    }
  }
  out.score = best;
  out.labels.assign(t_len, 0);
  out.labels[t_len - 1] = last;
  for (std::size_t t = t_len - 1; t > 0; --t) {
    out.labels[t - 1] = backpointer[t * k + out.labels[t]];
  }
  return out;
}

std::vector<int> softmax_decode(const Matrix& emissions) {
  std::vector<int> out(emissions.rows(), 0);
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < emissions.cols(); ++y) {
      if (emissions(t, y) > best) {
        best = emissions(t, y);
        out[t] = static_cast<int>(y);
      }
    }
  }
  return out;
}

SoftmaxNllResult softmax_nll(const Matrix& emissions, std::span<const int> gold) {
  check_labels(gold, emissions);
  SoftmaxNllResult out{0.0, Matrix(emissions.rows(), emissions.cols())};
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const double lse = kernels::log_sum_exp(emissions.row(t));
    out.loss += lse - emissions(t, gold[t]);
    for (std::size_t y = 0; y < emissions.cols(); ++y) {
      out.emission_grad(t, y) = std::exp(emissions(t, y) - lse);
    }
    out.emission_grad(t, gold[t]) -= 1.0;
  }
  return out;
}

}  // namespace seqforge::crf
