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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "seqforge/config.hpp"
#include "seqforge/crf.hpp"
#include "seqforge/error.hpp"
#include "seqforge/model.hpp"
#include "support.hpp"

namespace seqforge {
namespace {

using testing::Rng;

Vocabulary small_vocab() {
  return Vocabulary({"<PAD>", "<UNK>", "John", "lives", "in", "Boston"},
                    {"<PAD>", "<UNK>", "a", "b", "c", "J"}, {"O", "B-PER", "I-PER"});
}

TEST(Architecture, DefaultDimensions) {
  Config config;
  const Vocabulary vocab = small_vocab();
  const Architecture arch = make_architecture(config, vocab);
  EXPECT_EQ(arch.token_input(), 200u + 2 * 50u);
  const ModelParams p = init_params(arch, vocab, {}, 1, true);
  EXPECT_EQ(p.char_embeddings.rows(), vocab.char_count());
  EXPECT_EQ(p.char_embeddings.cols(), 25u);
  EXPECT_EQ(p.char_forward.hidden_dim(), 50u);
  EXPECT_EQ(p.token_forward.hidden_dim(), 300u);
  EXPECT_EQ(p.projection.rows(), 600u);
  EXPECT_EQ(p.projection.cols(), 3u);
  EXPECT_EQ(p.transitions.rows(), 5u);
}

TEST(Architecture, InitIsSeededAndForgetBiasIsOne) {
  Config config;
  config.char_embedding_dimension = 3;
  config.char_lstm_dimension = 2;
  config.token_embedding_dimension = 4;
  config.token_lstm_dimension = 3;
  const Vocabulary vocab = small_vocab();
  const Architecture arch = make_architecture(config, vocab);
  const ModelParams a = init_params(arch, vocab, {}, 7, false);
  const ModelParams b = init_params(arch, vocab, {}, 7, false);
  const ModelParams c = init_params(arch, vocab, {}, 8, false);
  EXPECT_EQ(a.token_embeddings, b.token_embeddings);
  EXPECT_EQ(a.projection, b.projection);
  EXPECT_NE(a.projection, c.projection);
  for (double v : a.transitions.values()) EXPECT_EQ(v, 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(a.token_forward.bias[j], 0.0);
    EXPECT_EQ(a.token_forward.bias[3 + j], 1.0);
  }
}

TEST(Architecture, PretrainedRowsAreCopied) {
  Config config;
  config.token_embedding_dimension = 2;
  config.using_character_lstm = false;
  const Vocabulary vocab = small_vocab();
  EmbeddingTable table{2, {{"boston", {0.25, -0.5}}, {"in", {1.0, 2.0}}}};
  const ModelParams p = init_params(make_architecture(config, vocab), vocab, table, 1, true);
  EXPECT_EQ(p.token_embeddings(5, 0), 0.25);
  EXPECT_EQ(p.token_embeddings(5, 1), -0.5);
  EXPECT_EQ(p.token_embeddings(4, 1), 2.0);
  table.dimension = 3;
  EXPECT_THROW(init_params(make_architecture(config, vocab), vocab, table, 1, true), Error);
}

TEST(Forward, ZeroParamsGiveZeroEmissions) {
  Config config;
  config.char_embedding_dimension = 2;
  config.char_lstm_dimension = 2;
  config.token_embedding_dimension = 3;
  config.token_lstm_dimension = 2;
  const Vocabulary vocab = small_vocab();
  ModelParams p = init_params(make_architecture(config, vocab), vocab, {}, 1, true);
  for (auto& t : named_tensors(p)) {
    for (double& v : t.data) v = 0.0;
  }
  const EncodedSentence s{{2, 3, 1}, {{5}, {2, 3}, {4}}, {1, 0, 0}};
  const Matrix em = emissions(p, s);
  ASSERT_EQ(em.rows(), 3u);
  for (double v : em.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, PalindromeWithSharedCharWeightsIsSymmetric) {
  Rng rng(31);
  auto m = testing::random_tiny_model(rng, true, true, 3);
  m.params.char_backward = m.params.char_forward;
  const std::size_t h = m.params.arch.char_hidden;
  for (const std::vector<int>& word : {std::vector<int>{2, 3, 2}, std::vector<int>{4}}) {
    const Vector rep = char_encode(m.params, word);
    ASSERT_EQ(rep.size(), 2 * h);
    for (std::size_t i = 0; i < h; ++i) EXPECT_NEAR(rep[i], rep[h + i], 1e-15);
  }
}

TEST(Forward, DropoutOnlyActsWhenTraining) {
  Rng rng(32);
  auto m = testing::random_tiny_model(rng, true, true, 4);
  std::mt19937_64 r1(1), r2(2);
  const Matrix reference = emissions(m.params, m.sentence);
  EXPECT_EQ(forward(m.params, m.sentence, 0.5, false, r1).emissions, reference);
  EXPECT_EQ(forward(m.params, m.sentence, 0.0, true, r1).emissions, reference);
  const auto a = forward(m.params, m.sentence, 0.5, true, r1);
  const auto b = forward(m.params, m.sentence, 0.5, true, r2);
  EXPECT_FALSE(a.cache.dropout_masks.empty());
  // Inverted dropout: kept units are scaled by 1 / (1 - p).
  for (const auto& mask : a.cache.dropout_masks) {
    for (double v : mask) EXPECT_TRUE(v == 0.0 || v == 2.0);
  }
  EXPECT_NE(a.emissions, b.emissions);
}

TEST(Gradients, MatchFiniteDifferencesWithCrf) {
  Rng rng(33);
  for (int trial = 0; trial < 15; ++trial) {
    const auto m = testing::random_tiny_model(rng, true, rng.coin(0.8), 4);
    const auto check = testing::check_gradients(m.params, m.sentence, 1e-4);
    ASSERT_LE(check.worst_relative_error, 1e-4)
        << check.worst_tensor << "[" << check.worst_index << "] analytic " << check.analytic
        << " numeric " << check.numeric;
  }
}

TEST(Gradients, MatchFiniteDifferencesWithSoftmax) {
  Rng rng(34);
  for (int trial = 0; trial < 15; ++trial) {
    const auto m = testing::random_tiny_model(rng, false, rng.coin(0.8), 4);
    const auto check = testing::check_gradients(m.params, m.sentence, 1e-4);
    ASSERT_LE(check.worst_relative_error, 1e-4)
        << check.worst_tensor << "[" << check.worst_index << "] analytic " << check.analytic
        << " numeric " << check.numeric;
  }
}

TEST(Gradients, VanishNearAConfidentFit) {
  Rng rng(35);
  auto m = testing::random_tiny_model(rng, false, false, 3);
  for (auto& t : named_tensors(m.params)) {
    for (double& v : t.data) v = 0.0;
  }
  // Bias alone makes label 0 overwhelmingly likely everywhere.
  m.params.projection_bias[0] = 40.0;
  for (int& l : m.sentence.labels) l = 0;
  const auto fwd = forward(m.params, m.sentence, 0.0, false, rng.engine());
  const auto loss = sentence_loss(m.params, fwd.emissions, m.sentence.labels);
  EXPECT_LT(loss.value, 1e-12);
  EXPECT_LT(gradient_norm(backward(m.params, fwd.cache, loss)), 1e-12);
}

TEST(Sgd, PlainStepAndClipping) {
  Rng rng(36);
  auto m = testing::random_tiny_model(rng, true, false, 2);
  Gradients g = Gradients::zeros_like(m.params);
  const double before = m.params.projection_bias[0];
  g.projection_bias[0] = 0.2;
  EXPECT_NEAR(sgd_step(m.params, g, 0.1, 0.0), 0.2, 1e-15);
  EXPECT_NEAR(m.params.projection_bias[0], before - 0.02, 1e-15);

  // Norm 10 with clip 5 halves the step.
  g.clear();
  g.projection_bias[0] = 6.0;
  g.token_embeddings[2] = Vector(m.params.arch.token_embedding, 0.0);
  g.token_embeddings[2][0] = 8.0;
  const double e_before = m.params.token_embeddings(2, 0);
  const double b_before = m.params.projection_bias[0];
  EXPECT_NEAR(sgd_step(m.params, g, 1.0, 5.0), 10.0, 1e-12);
  EXPECT_NEAR(m.params.projection_bias[0], b_before - 3.0, 1e-12);
  EXPECT_NEAR(m.params.token_embeddings(2, 0), e_before - 4.0, 1e-12);
}

TEST(Sgd, ScalarExample) {
  Rng rng(37);
  auto m = testing::random_tiny_model(rng, true, false, 2);
  m.params.projection_bias[0] = 1.0;
  Gradients g = Gradients::zeros_like(m.params);
  g.projection_bias[0] = 0.2;
  sgd_step(m.params, g, 0.1, 5.0);
  EXPECT_NEAR(m.params.projection_bias[0], 0.98, 1e-15);
}

TEST(Sgd, ZeroGradientLeavesParamsUnchanged) {
  Rng rng(38);
  auto m = testing::random_tiny_model(rng, true, true, 2);
  const ModelParams before = m.params;
  sgd_step(m.params, Gradients::zeros_like(m.params), 0.5, 5.0);
  const auto a = named_tensors(before);
  const auto b = named_tensors(m.params);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(std::equal(a[i].data.begin(), a[i].data.end(), b[i].data.begin())) << a[i].name;
  }
}

TEST(Decode, UsesViterbiOrArgmax) {
  Rng rng(39);
  auto m = testing::random_tiny_model(rng, true, false, 4);
  const Matrix em = emissions(m.params, m.sentence);
  EXPECT_EQ(decode(m.params, em), crf::viterbi_decode(em, m.params.transitions).labels);
  m.params.arch.using_crf = false;
  EXPECT_EQ(decode(m.params, em), crf::softmax_decode(em));
}

}  // namespace
}  // namespace seqforge
