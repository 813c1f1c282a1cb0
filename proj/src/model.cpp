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

#include "seqforge/model.hpp"

#include <algorithm>
#include <cmath>

#include "seqforge/config.hpp"
#include "seqforge/crf.hpp"
#include "seqforge/error.hpp"

namespace seqforge {
namespace {

template <class F>
void visit_lstm(const std::string& prefix, auto& w, F&& f) {
  f(prefix + ".input_weights", w.input_weights.rows(), w.input_weights.cols(),
    w.input_weights.values());
  f(prefix + ".hidden_weights", w.hidden_weights.rows(), w.hidden_weights.cols(),
    w.hidden_weights.values());
  f(prefix + ".bias", std::size_t{1}, w.bias.size(), std::span(w.bias));
}

// Visits every tensor in checkpoint order; embeddings go to `embedding`.
template <class P, class F, class G>
void visit_tensors(P& p, F&& f, G&& embedding) {
  embedding("char_embeddings", p.char_embeddings);
  visit_lstm("char_lstm_forward", p.char_forward, f);
  visit_lstm("char_lstm_backward", p.char_backward, f);
  embedding("token_embeddings", p.token_embeddings);
  visit_lstm("token_lstm_forward", p.token_forward, f);
  visit_lstm("token_lstm_backward", p.token_backward, f);
  f("projection.weights", p.projection.rows(), p.projection.cols(), p.projection.values());
  f("projection.bias", std::size_t{1}, p.projection_bias.size(), std::span(p.projection_bias));
  f("crf.transitions", p.transitions.rows(), p.transitions.cols(), p.transitions.values());
}

void uniform_fill(std::span<double> values, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : values) v = dist(rng);
}

void glorot_fill(Matrix& m, std::mt19937_64& rng) {
  if (m.empty()) return;
  uniform_fill(m.values(), std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())), rng);
}

LstmWeights init_lstm(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng) {
  LstmWeights w = LstmWeights::zeros(input_dim, hidden_dim);
  glorot_fill(w.input_weights, rng);
  glorot_fill(w.hidden_weights, rng);
  for (std::size_t j = 0; j < hidden_dim; ++j) w.bias[hidden_dim + j] = 1.0;
  return w;
}

Vector& sparse_row(SparseRows& rows, int index, std::size_t width) {
  Vector& row = rows[index];
  if (row.empty()) row.assign(width, 0.0);
  return row;
}

std::vector<Vector> embed_chars(const ModelParams& params, std::span<const int> chars,
                                bool reversed) {
  std::vector<Vector> out;
  out.reserve(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const int c = reversed ? chars[chars.size() - 1 - i] : chars[i];
    const auto row = params.char_embeddings.row(static_cast<std::size_t>(c));
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

void check_index(int index, std::size_t bound, const char* what) {
  if (index < 0 || static_cast<std::size_t>(index) >= bound) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " index " + std::to_string(index) +
                                               " outside vocabulary of " + std::to_string(bound));
  }
}

}  // namespace

Architecture make_architecture(const Config& config, const Vocabulary& vocab) {
  Architecture arch;
  arch.using_char_lstm = config.using_character_lstm;
  arch.using_crf = config.using_crf;
  arch.char_vocab = config.using_character_lstm ? vocab.char_count() : 0;
  arch.char_embedding = config.using_character_lstm ? config.char_embedding_dimension : 0;
  arch.char_hidden = config.using_character_lstm ? config.char_lstm_dimension : 0;
  arch.token_vocab = vocab.token_count();
  arch.token_embedding = config.token_embedding_dimension;
  arch.token_hidden = config.token_lstm_dimension;
  arch.num_labels = vocab.label_count();
  return arch;
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  Gradients g;
  const Architecture& a = params.arch;
  g.char_forward = LstmWeights::zeros(a.char_embedding, a.char_hidden);
  g.char_backward = LstmWeights::zeros(a.char_embedding, a.char_hidden);
  g.token_forward = LstmWeights::zeros(a.token_input(), a.token_hidden);
  g.token_backward = LstmWeights::zeros(a.token_input(), a.token_hidden);
  g.projection = Matrix(2 * a.token_hidden, a.num_labels);
  g.projection_bias.assign(a.num_labels, 0.0);
  g.transitions = Matrix(a.num_labels + 2, a.num_labels + 2);
  return g;
}

void Gradients::clear() {
  char_embeddings.clear();
  token_embeddings.clear();
  for (auto& t : dense_tensors(*this)) std::fill(t.data.begin(), t.data.end(), 0.0);
}

std::vector<TensorRef> named_tensors(ModelParams& params) {
  std::vector<TensorRef> out;
  auto dense = [&](std::string name, std::size_t r, std::size_t c, std::span<double> d) {
    out.push_back({std::move(name), r, c, d});
  };
  visit_tensors(params, dense, [&](std::string name, Matrix& m) {
    out.push_back({std::move(name), m.rows(), m.cols(), m.values()});
  });
  return out;
}

std::vector<ConstTensorRef> named_tensors(const ModelParams& params) {
  std::vector<ConstTensorRef> out;
  auto dense = [&](std::string name, std::size_t r, std::size_t c, std::span<const double> d) {
    out.push_back({std::move(name), r, c, d});
  };
  visit_tensors(params, dense, [&](std::string name, const Matrix& m) {
    out.push_back({std::move(name), m.rows(), m.cols(), m.values()});
  });
  return out;
}

std::vector<TensorRef> dense_tensors(Gradients& grads) {
  std::vector<TensorRef> out;
  auto dense = [&](std::string name, std::size_t r, std::size_t c, std::span<double> d) {
    out.push_back({std::move(name), r, c, d});
  };
  visit_tensors(grads, dense, [](std::string, SparseRows&) {});
  return out;
}

std::vector<ConstTensorRef> dense_tensors(const Gradients& grads) {
  std::vector<ConstTensorRef> out;
  auto dense = [&](std::string name, std::size_t r, std::size_t c, std::span<const double> d) {
    out.push_back({std::move(name), r, c, d});
  };
  visit_tensors(grads, dense, [](std::string, const SparseRows&) {});
  return out;
}

ModelParams init_params(const Architecture& arch, const Vocabulary& vocab,
                        const EmbeddingTable& embeddings, std::uint64_t seed,
                        bool random_initial_transitions) {
  if (!embeddings.entries.empty() && embeddings.dimension != arch.token_embedding) {
    throw Error(ErrorCode::kShapeMismatch,
                "pretrained embeddings have dimension " + std::to_string(embeddings.dimension) +
                    " but token_embedding_dimension is " + std::to_string(arch.token_embedding));
  }
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.arch = arch;

  p.char_embeddings = Matrix(arch.char_vocab, arch.char_embedding);
  if (!p.char_embeddings.empty()) {
    uniform_fill(p.char_embeddings.values(), std::sqrt(3.0 / arch.char_embedding), rng);
  }
  p.char_forward = init_lstm(arch.char_embedding, arch.char_hidden, rng);
  p.char_backward = init_lstm(arch.char_embedding, arch.char_hidden, rng);

  p.token_embeddings = Matrix(arch.token_vocab, arch.token_embedding);
  uniform_fill(p.token_embeddings.values(), std::sqrt(3.0 / arch.token_embedding), rng);
  for (std::size_t i = 0; i < vocab.token_count() && i < arch.token_vocab; ++i) {
    const std::string& tok = vocab.tokens()[i];
    auto it = embeddings.entries.find(tok);
    if (it == embeddings.entries.end()) it = embeddings.entries.find(normalize_token(tok));
    if (it != embeddings.entries.end()) {
      std::copy(it->second.begin(), it->second.end(), p.token_embeddings.row(i).begin());
    }
  }

  p.token_forward = init_lstm(arch.token_input(), arch.token_hidden, rng);
  p.token_backward = init_lstm(arch.token_input(), arch.token_hidden, rng);
  p.projection = Matrix(2 * arch.token_hidden, arch.num_labels);
  glorot_fill(p.projection, rng);
  p.projection_bias.assign(arch.num_labels, 0.0);
  p.transitions = Matrix(arch.num_labels + 2, arch.num_labels + 2);
  if (random_initial_transitions) {
    uniform_fill(p.transitions.values(), 0.1, rng);
    crf::mask_unused_transitions(p.transitions);
  }
  return p;
}

EncodedSentence encode_sentence(const Vocabulary& vocab, const LabeledSentence& sentence,
                                TaggingFormat format) {
  EncodedSentence out;
  for (const auto& tok : sentence.tokens) {
    out.words.push_back(vocab.lookup_token(tok.text));
    out.chars.push_back(vocab.lookup_chars(tok.text));
  }
  if (!sentence.labels.empty()) {
    const std::vector<std::string> labels =
        format == TaggingFormat::kBioes ? to_bioes(sentence.labels) : to_bio(sentence.labels);
    for (const auto& l : labels) out.labels.push_back(vocab.find_label(l));
  }
  return out;
}

Vector char_encode(const ModelParams& params, std::span<const int> chars) {
  const std::size_t h = params.arch.char_hidden;
  Vector out(2 * h, 0.0);
  if (chars.empty() || h == 0) return out;
  for (int c : chars) check_index(c, params.char_embeddings.rows(), "character");
  const LstmTrace fw = lstm_forward(params.char_forward, embed_chars(params, chars, false));
  const LstmTrace bw = lstm_forward(params.char_backward, embed_chars(params, chars, true));
  std::copy(fw.hiddens.back().begin(), fw.hiddens.back().end(), out.begin());
  std::copy(bw.hiddens.back().begin(), bw.hiddens.back().end(), out.begin() + h);
  return out;
}

ForwardResult forward(const ModelParams& params, const EncodedSentence& sentence, double dropout,
                      bool training, std::mt19937_64& rng) {
  const Architecture& a = params.arch;
  const std::size_t t_len = sentence.words.size();
  const std::size_t dt = a.token_embedding;
  const std::size_t hc = a.char_hidden;
  ForwardResult out;
  ForwardCache& cache = out.cache;
  cache.words = sentence.words;
  cache.chars = sentence.chars;

  std::vector<Vector> inputs(t_len, Vector(a.token_input(), 0.0));
  const bool use_dropout = training && dropout > 0.0;
  const double keep = 1.0 - dropout;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t t = 0; t < t_len; ++t) {
    check_index(sentence.words[t], params.token_embeddings.rows(), "token");
    const auto emb = params.token_embeddings.row(static_cast<std::size_t>(sentence.words[t]));
    std::copy(emb.begin(), emb.end(), inputs[t].begin());
    if (a.using_char_lstm) {
      const auto& chars = sentence.chars[t];
      for (int c : chars) check_index(c, params.char_embeddings.rows(), "character");
      LstmTrace fw = lstm_forward(params.char_forward, embed_chars(params, chars, false));
      LstmTrace bw = lstm_forward(params.char_backward, embed_chars(params, chars, true));
      if (!chars.empty()) {
        std::copy(fw.hiddens.back().begin(), fw.hiddens.back().end(), inputs[t].begin() + dt);
        std::copy(bw.hiddens.back().begin(), bw.hiddens.back().end(),
                  inputs[t].begin() + dt + hc);
      }
      cache.char_forward.push_back(std::move(fw));
      cache.char_backward.push_back(std::move(bw));
    }
    if (use_dropout) {
      Vector mask(inputs[t].size());
      for (double& m : mask) m = unit(rng) < keep ? 1.0 / keep : 0.0;
      for (std::size_t j = 0; j < mask.size(); ++j) inputs[t][j] *= mask[j];
      cache.dropout_masks.push_back(std::move(mask));
    }
  }

  cache.token_forward = lstm_forward(params.token_forward, inputs);
  std::vector<Vector> reversed(inputs.rbegin(), inputs.rend());
  cache.token_backward = lstm_forward(params.token_backward, reversed);

  const std::size_t h = a.token_hidden;
  out.emissions = Matrix(t_len, a.num_labels);
  cache.states.assign(t_len, Vector(2 * h, 0.0));
  for (std::size_t t = 0; t < t_len; ++t) {
    Vector& z = cache.states[t];
    const Vector& hf = cache.token_forward.hiddens[t];
    const Vector& hb = cache.token_backward.hiddens[t_len - 1 - t];
    std::copy(hf.begin(), hf.end(), z.begin());
    std::copy(hb.begin(), hb.end(), z.begin() + h);
    auto row = out.emissions.row(t);
    std::copy(params.projection_bias.begin(), params.projection_bias.end(), row.begin());
    kernels::gemv_transposed_add(params.projection, z, row);
  }
  return out;
}

Matrix emissions(const ModelParams& params, const EncodedSentence& sentence) {
  std::mt19937_64 unused(0);
  return forward(params, sentence, 0.0, false, unused).emissions;
}

LossResult sentence_loss(const ModelParams& params, const Matrix& emissions,
                         std::span<const int> gold) {
  std::vector<int> labels(gold.begin(), gold.end());
  for (int& y : labels) {
    if (y < 0) y = 0;
  }
  LossResult out;
  if (params.arch.using_crf) {
    crf::NllResult r = crf::negative_log_likelihood(emissions, params.transitions, labels);
    out.value = r.loss;
    out.emission_grad = std::move(r.emission_grad);
    out.transition_grad = std::move(r.transition_grad);
  } else {
    crf::SoftmaxNllResult r = crf::softmax_nll(emissions, labels);
    out.value = r.loss;
    out.emission_grad = std::move(r.emission_grad);
  }
  return out;
}

void backward(const ModelParams& params, const ForwardCache& cache, const LossResult& loss,
              Gradients& grads) {
  const Architecture& a = params.arch;
  const std::size_t t_len = cache.words.size();
  const std::size_t h = a.token_hidden;
  const std::size_t dt = a.token_embedding;
  const std::size_t hc = a.char_hidden;

  std::vector<Vector> fw_grads(t_len, Vector(h, 0.0));
  std::vector<Vector> bw_grads(t_len, Vector(h, 0.0));
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto de = loss.emission_grad.row(t);
    kernels::axpy(1.0, de, grads.projection_bias);
    kernels::outer_add(cache.states[t], de, grads.projection);
    Vector dz(2 * h, 0.0);
    kernels::gemv_add(params.projection, de, dz);
    std::copy(dz.begin(), dz.begin() + h, fw_grads[t].begin());
    std::copy(dz.begin() + h, dz.end(), bw_grads[t_len - 1 - t].begin());
  }
  if (!loss.transition_grad.empty()) {
    kernels::axpy(1.0, loss.transition_grad.values(), grads.transitions.values());
  }

  const std::vector<Vector> dx_fw =
      lstm_backward(params.token_forward, cache.token_forward, fw_grads, grads.token_forward);
  const std::vector<Vector> dx_bw =
      lstm_backward(params.token_backward, cache.token_backward, bw_grads, grads.token_backward);

  for (std::size_t t = 0; t < t_len; ++t) {
    Vector dx = dx_fw[t];
    kernels::axpy(1.0, dx_bw[t_len - 1 - t], dx);
    if (!cache.dropout_masks.empty()) {
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] *= cache.dropout_masks[t][j];
    }
    Vector& trow = sparse_row(grads.token_embeddings, cache.words[t], dt);
    kernels::axpy(1.0, std::span<const double>(dx).first(dt), trow);

    if (!a.using_char_lstm) continue;
    const auto& chars = cache.chars[t];
    if (chars.empty()) continue;
    const std::size_t n = chars.size();
    std::vector<Vector> hf(n);
    std::vector<Vector> hb(n);
    hf[n - 1].assign(dx.begin() + dt, dx.begin() + dt + hc);
    hb[n - 1].assign(dx.begin() + dt + hc, dx.begin() + dt + 2 * hc);
    const std::vector<Vector> dcf =
        lstm_backward(params.char_forward, cache.char_forward[t], hf, grads.char_forward);
    const std::vector<Vector> dcb =
        lstm_backward(params.char_backward, cache.char_backward[t], hb, grads.char_backward);
    for (std::size_t i = 0; i < n; ++i) {
      kernels::axpy(1.0, dcf[i], sparse_row(grads.char_embeddings, chars[i], a.char_embedding));
      kernels::axpy(1.0, dcb[i],
                    sparse_row(grads.char_embeddings, chars[n - 1 - i], a.char_embedding));
    }
  }
}

Gradients backward(const ModelParams& params, const ForwardCache& cache, const LossResult& loss) {
  Gradients g = Gradients::zeros_like(params);
  backward(params, cache, loss, g);
  return g;
}

std::vector<int> decode(const ModelParams& params, const Matrix& emissions) {
  if (params.arch.using_crf) return crf::viterbi_decode(emissions, params.transitions).labels;
  return crf::softmax_decode(emissions);
}

double gradient_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& t : dense_tensors(grads)) sq += kernels::squared_norm(t.data);
  for (const auto& [i, row] : grads.char_embeddings) sq += kernels::squared_norm(row);
  for (const auto& [i, row] : grads.token_embeddings) sq += kernels::squared_norm(row);
  return std::sqrt(sq);
}

double sgd_step(ModelParams& params, const Gradients& grads, double learning_rate, double clip) {
  const double norm = gradient_norm(grads);
  double scale = 1.0;
  if (clip > 0.0 && norm > clip) scale = clip / norm;
  const double step = -learning_rate * scale;

  std::vector<TensorRef> dense_params;
  for (auto& t : named_tensors(params)) {
    if (t.name != "char_embeddings" && t.name != "token_embeddings") dense_params.push_back(t);
  }
  const std::vector<ConstTensorRef> dense_grads = dense_tensors(grads);
  for (std::size_t i = 0; i < dense_params.size(); ++i) {
    kernels::axpy(step, dense_grads[i].data, dense_params[i].data);
  }
  for (const auto& [idx, row] : grads.char_embeddings) {
    kernels::axpy(step, row, params.char_embeddings.row(static_cast<std::size_t>(idx)));
  }
  for (const auto& [idx, row] : grads.token_embeddings) {
    kernels::axpy(step, row, params.token_embeddings.row(static_cast<std::size_t>(idx)));
  }
  return norm;
}

}  // namespace seqforge
