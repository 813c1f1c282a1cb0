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

#include "seqforge/lstm.hpp"

#include <cmath>

namespace seqforge {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LstmWeights LstmWeights::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  return {Matrix(4 * hidden_dim, input_dim), Matrix(4 * hidden_dim, hidden_dim),
          Vector(4 * hidden_dim, 0.0)};
}

LstmTrace lstm_forward(const LstmWeights& w, std::span<const Vector> inputs) {
  const std::size_t h = w.hidden_dim();
  LstmTrace trace;
  trace.inputs.assign(inputs.begin(), inputs.end());
  Vector prev_h(h, 0.0);
  Vector prev_c(h, 0.0);
  for (const Vector& x : inputs) {
    Vector a = w.bias;
    kernels::gemv_add(w.input_weights, x, a);
    kernels::gemv_add(w.hidden_weights, prev_h, a);
    Vector gates(4 * h);
    Vector c(h);
    Vector c_tanh(h);
    Vector hidden(h);
    for (std::size_t j = 0; j < h; ++j) {
      const double i = sigmoid(a[j]);
      const double f = sigmoid(a[h + j]);
      const double o = sigmoid(a[2 * h + j]);
      const double g = std::tanh(a[3 * h + j]);
      gates[j] = i;
      gates[h + j] = f;
      gates[2 * h + j] = o;
      gates[3 * h + j] = g;
      c[j] = f * prev_c[j] + i * g;
      c_tanh[j] = std::tanh(c[j]);
      hidden[j] = o * c_tanh[j];
    }
    prev_h = hidden;
    prev_c = c;
    trace.gates.push_back(std::move(gates));
    trace.cells.push_back(std::move(c));
    trace.cell_tanh.push_back(std::move(c_tanh));
    trace.hiddens.push_back(std::move(hidden));
  }
  return trace;
}

std::vector<Vector> lstm_backward(const LstmWeights& w, const LstmTrace& trace,
                                  std::span<const Vector> hidden_grads, LstmWeights& grads) {
  const std::size_t h = w.hidden_dim();
  const std::size_t steps = trace.steps();
  std::vector<Vector> input_grads(steps, Vector(w.input_dim(), 0.0));
  Vector dh_next(h, 0.0);
  Vector dc_next(h, 0.0);
  const Vector zeros(h, 0.0);

  for (std::size_t s = steps; s-- > 0;) {
    const Vector& gates = trace.gates[s];
    const Vector& prev_c = s > 0 ? trace.cells[s - 1] : zeros;
    const Vector& prev_h = s > 0 ? trace.hiddens[s - 1] : zeros;
    const bool has_ext = s < hidden_grads.size() && !hidden_grads[s].empty();

    Vector da(4 * h);
    for (std::size_t j = 0; j < h; ++j) {
      const double dh = dh_next[j] + (has_ext ? hidden_grads[s][j] : 0.0);
      const double i = gates[j];
      const double f = gates[h + j];
      const double o = gates[2 * h + j];
      const double g = gates[3 * h + j];
      const double tc = trace.cell_tanh[s][j];
      const double d_o = dh * tc;
      const double dc = dh * o * (1.0 - tc * tc) + dc_next[j];
      da[j] = dc * g * i * (1.0 - i);
      da[h + j] = dc * prev_c[j] * f * (1.0 - f);
      da[2 * h + j] = d_o * o * (1.0 - o);
      da[3 * h + j] = dc * i * (1.0 - g * g);
      dc_next[j] = dc * f;
    }
    kernels::outer_add(da, trace.inputs[s], grads.input_weights);
    kernels::outer_add(da, prev_h, grads.hidden_weights);
    kernels::axpy(1.0, da, grads.bias);
    kernels::gemv_transposed_add(w.input_weights, da, input_grads[s]);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    kernels::gemv_transposed_add(w.hidden_weights, da, dh_next);
  }
  return input_grads;
}

}  // namespace seqforge
