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
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqforge/corpus.hpp"
#include "seqforge/embeddings.hpp"
#include "seqforge/lstm.hpp"
#include "seqforge/tensor.hpp"

namespace seqforge {

struct Config;

// Shape and switches of the network.
struct Architecture {
  std::size_t char_vocab = 0;
  std::size_t char_embedding = 0;
  std::size_t char_hidden = 0;
  std::size_t token_vocab = 0;
  std::size_t token_embedding = 0;
  std::size_t token_hidden = 0;
  std::size_t num_labels = 0;
  bool using_char_lstm = true;
  bool using_crf = true;

  std::size_t token_input() const {
    return token_embedding + (using_char_lstm ? 2 * char_hidden : 0);
  }
  bool operator==(const Architecture&) const = default;
};

Architecture make_architecture(const Config& config, const Vocabulary& vocab);

// Every learnable tensor. `Embedding` is a dense Matrix for parameters and
// a sparse row map for gradients.
template <class Embedding>
struct ParamTensors {
  Embedding char_embeddings;   // |chars| x d_c
  LstmWeights char_forward;    // input d_c, hidden d_cl
  LstmWeights char_backward;
  Embedding token_embeddings;  // |tokens| x d_t
  LstmWeights token_forward;   // input d_t + 2 d_cl, hidden d_tl
  LstmWeights token_backward;
  Matrix projection;           // 2 d_tl x K
  Vector projection_bias;      // K
  Matrix transitions;          // (K+2) x (K+2), see crf.hpp
};

using SparseRows = std::map<int, Vector>;

struct ModelParams : ParamTensors<Matrix> {
  Architecture arch;
};

struct Gradients : ParamTensors<SparseRows> {
  // Zero dense gradients shaped like `params`.
  static Gradients zeros_like(const ModelParams& params);
  void clear();
};

struct TensorRef {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<double> data;
};

struct ConstTensorRef {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> data;
};

// All tensors in checkpoint order, embeddings included.
std::vector<TensorRef> named_tensors(ModelParams& params);
std::vector<ConstTensorRef> named_tensors(const ModelParams& params);
// Dense gradient tensors, same names; embeddings excluded (they are sparse).
std::vector<TensorRef> dense_tensors(Gradients& grads);
std::vector<ConstTensorRef> dense_tensors(const Gradients& grads);

// Glorot-uniform LSTM and projection weights, forget-gate bias 1, other
// biases 0; token rows copied from `embeddings` where available, remaining
// rows uniform in +-sqrt(3/d_t). Transitions uniform in +-0.1 or all zero.
// Throws ShapeMismatch when the table's dimension differs from d_t.
ModelParams init_params(const Architecture& arch, const Vocabulary& vocab,
                        const EmbeddingTable& embeddings, std::uint64_t seed,
                        bool random_initial_transitions);

// Vocabulary indices of one sentence. Labels are -1 when unknown.
struct EncodedSentence {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<int> labels;
};

// Labels are converted to `format` before lookup.
EncodedSentence encode_sentence(const Vocabulary& vocab, const LabeledSentence& sentence,
                                TaggingFormat format);

// Concatenated final states of the forward and backward character LSTMs.
Vector char_encode(const ModelParams& params, std::span<const int> chars);

struct ForwardCache {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<LstmTrace> char_forward;   // per token
  std::vector<LstmTrace> char_backward;  // per token, reversed characters
  std::vector<Vector> dropout_masks;     // empty when dropout is inactive
  LstmTrace token_forward;
  LstmTrace token_backward;  // processing order is reversed positions
  std::vector<Vector> states;  // concat of both directions per position
};

struct ForwardResult {
  Matrix emissions;  // T x K
  ForwardCache cache;
};

// Inverted dropout on the token representation when `training` is set.
ForwardResult forward(const ModelParams& params, const EncodedSentence& sentence, double dropout,
                      bool training, std::mt19937_64& rng);

// Emission scores for inference (no dropout).
Matrix emissions(const ModelParams& params, const EncodedSentence& sentence);

struct LossResult {
  double value = 0.0;
  Matrix emission_grad;
  Matrix transition_grad;  // empty in softmax mode
};

// CRF negative log-likelihood, or summed per-token cross-entropy when the
// CRF is disabled. Unknown gold labels (-1) are scored as label 0.
LossResult sentence_loss(const ModelParams& params, const Matrix& emissions,
                         std::span<const int> gold);

// Accumulates dLoss/dparams into `grads`.
void backward(const ModelParams& params, const ForwardCache& cache, const LossResult& loss,
              Gradients& grads);
Gradients backward(const ModelParams& params, const ForwardCache& cache, const LossResult& loss);

// Viterbi or per-position argmax depending on the architecture.
std::vector<int> decode(const ModelParams& params, const Matrix& emissions);

double gradient_norm(const Gradients& grads);

// Global-norm clipping (clip <= 0 disables) then plain SGD. Only embedding
// rows present in the sparse gradient are touched. Returns the pre-clip norm.
double sgd_step(ModelParams& params, const Gradients& grads, double learning_rate, double clip);

}  // namespace seqforge
