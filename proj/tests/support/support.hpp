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

// Shared test helpers: seeded generators, brute-force oracles and scratch
// directories. Nothing here calls the code under test to compute an
// expected value except where noted.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seqforge/config.hpp"
#include "seqforge/corpus.hpp"
#include "seqforge/embeddings.hpp"
#include "seqforge/model.hpp"
#include "seqforge/tensor.hpp"

namespace seqforge::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(engine_); }
  // Inclusive bounds.
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0);

// Emissions T x K and masked (K+2) x (K+2) transitions.
struct CrfInstance {
  Matrix emissions;
  Matrix transitions;
};
CrfInstance random_crf_instance(Rng& rng, std::size_t length, std::size_t labels);

// --- enumeration oracle -----------------------------------------------------

// Score of a label path, summed directly from the definition.
double path_score(const Matrix& emissions, const Matrix& transitions, const std::vector<int>& path);

// Every K^T label sequence in lexicographic order.
std::vector<std::vector<int>> all_paths(std::size_t length, std::size_t labels);

struct Enumeration {
  double log_partition = 0.0;
  std::vector<int> best;  // argmax; ties broken as described below
  double best_score = 0.0;
};
// Brute-force log partition and argmax. Paths whose scores are within
// `tie_tolerance` of each other are ties; among tied paths the one that is
// smallest when compared from the last position backwards wins.
Enumeration enumerate(const Matrix& emissions, const Matrix& transitions,
                      double tie_tolerance = 1e-12);

// --- tiny full models -------------------------------------------------------

struct TinyModel {
  Vocabulary vocab;
  ModelParams params;
  EncodedSentence sentence;
};
// dims <= 4, sentence length in [1, max_len]; every parameter is random
// (not just the initializer's ranges) so no gradient is zero by symmetry.
TinyModel random_tiny_model(Rng& rng, bool using_crf, bool using_char_lstm, std::size_t max_len);

struct GradientCheck {
  double worst_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components = 0;
};
// Central differences of the inference-mode loss over every component of
// every parameter tensor. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheck check_gradients(ModelParams params, const EncodedSentence& sentence, double h);

// --- corpora ----------------------------------------------------------------

// Canonical BRAT pair (ids in numeric order) with random Unicode text and
// random non-overlapping spans confined to single lines.
struct FuzzedBrat {
  std::string text;
  std::string ann;
  std::size_t span_count = 0;
};
FuzzedBrat fuzz_brat_document(Rng& rng);

// Documents whose spans cover whole tokens: words joined by single spaces,
// one sentence per line.
Document random_aligned_document(Rng& rng, const std::string& id);

// --- scoring -----------------------------------------------------------------

// Gold/predicted document pairs with counts and percentages worked out by
// hand (fractions, not scorer output).
struct ScoringCase {
  std::string name;
  std::vector<Document> gold;
  std::vector<Document> predicted;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};
std::vector<ScoringCase> hand_counted_scoring_cases();

// The reference configuration excerpt, byte for byte (note the trailing
// space after the training time).
inline constexpr const char* kReferenceConfig = R"([dataset]
dataset_folder               = dat/conll

[character_lstm]
using_character_lstm         = True
char_embedding_dimension     = 25
char_lstm_dimension          = 50

[token_lstm]
token_emb_pretrained_file    = glove.txt
token_embedding_dimension    = 200
token_lstm_dimension         = 300

[crf]
using_crf                    = True
random_initial_transitions   = True

[training]
dropout                      = 0.5
patience                     = 10
maximum_number_of_epochs     = 100
maximum_training_time        = 10 
number_of_cpu_threads        = 8
)";

std::filesystem::path toy_corpus_dir();
std::filesystem::path toy_config_path();
std::filesystem::path cli_path();

// Unique empty directory under the system temp dir; removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

// Copies the toy corpus into `dir` and returns a config pointing at the copy
// with outputs under dir/output.
Config toy_config_in(const std::filesystem::path& dir);

std::string slurp(const std::filesystem::path& path);

}  // namespace seqforge::testing
