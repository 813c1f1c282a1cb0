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

#include <cstddef>
#include <span>
#include <vector>

#include "seqforge/tensor.hpp"

// Linear-chain CRF over K labels with two virtual states. The transition
// matrix is (K+2) x (K+2), indexed [from][to]; row K is START and column
// K+1 is END. Entries into START, out of END and START->END are never read.
//
//   score(y) = A[START][y_1] + sum_t A[y_{t-1}][y_t] + sum_t E[t][y_t] + A[y_T][END]
namespace seqforge::crf {

inline std::size_t start_state(std::size_t num_labels) { return num_labels; }
inline std::size_t end_state(std::size_t num_labels) { return num_labels + 1; }

// Zeroes the entries the lattice never reads.
void mask_unused_transitions(Matrix& transitions);

double sequence_score(const Matrix& emissions, const Matrix& transitions,
                      std::span<const int> labels);

struct Lattice {
  Matrix alpha;  // T x K, log forward scores including emissions
  Matrix beta;   // T x K, log backward scores excluding emission at t
  double log_partition = 0.0;
};

Lattice forward_backward(const Matrix& emissions, const Matrix& transitions);

struct NllResult {
  double loss = 0.0;
  Matrix emission_grad;    // T x K: posterior marginals minus gold one-hot
  Matrix transition_grad;  // (K+2) x (K+2)
};

// logZ - score(gold) and its gradients. Throws LabelOutOfRange, ShapeMismatch.
NllResult negative_log_likelihood(const Matrix& emissions, const Matrix& transitions,
                                  std::span<const int> gold);

struct Decoded {
  std::vector<int> labels;
  double score = 0.0;
};

// Max-product dynamic programming with backpointers. At every max the lower
// label index wins ties, so among equal-scoring paths the one that is
// smallest when compared from the last position backwards is returned.
Decoded viterbi_decode(const Matrix& emissions, const Matrix& transitions);

// Per-position argmax, lower index on ties. Used when the CRF is disabled.
std::vector<int> softmax_decode(const Matrix& emissions);

struct SoftmaxNllResult {
  double loss = 0.0;       // summed per-token cross-entropy
  Matrix emission_grad;    // softmax minus gold one-hot
};

SoftmaxNllResult softmax_nll(const Matrix& emissions, std::span<const int> gold);

}  // namespace seqforge::crf
