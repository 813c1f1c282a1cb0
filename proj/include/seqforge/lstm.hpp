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

namespace seqforge {

// Standard LSTM cell without peepholes. Gate blocks inside the 4h rows are
// ordered input, forget, output, candidate.
struct LstmWeights {
  Matrix input_weights;   // 4h x input_dim
  Matrix hidden_weights;  // 4h x h
  Vector bias;            // 4h

  std::size_t hidden_dim() const { return hidden_weights.cols(); }
  std::size_t input_dim() const { return input_weights.cols(); }

  static LstmWeights zeros(std::size_t input_dim, std::size_t hidden_dim);
};

// Activations of one pass, indexed by processing step.
struct LstmTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> gates;      // post-activation i, f, o, g
  std::vector<Vector> cells;
  std::vector<Vector> cell_tanh;
  std::vector<Vector> hiddens;

  std::size_t steps() const { return hiddens.size(); }
};

// Runs the cell over `inputs` in the given order, from zero state.
LstmTrace lstm_forward(const LstmWeights& w, std::span<const Vector> inputs);

// Backpropagation through time. `hidden_grads[s]` is dLoss/dh at step s
// (empty vectors mean zero). Accumulates into `grads` and returns
// dLoss/dinput per step.
std::vector<Vector> lstm_backward(const LstmWeights& w, const LstmTrace& trace,
                                  std::span<const Vector> hidden_grads, LstmWeights& grads);

}  // namespace seqforge
