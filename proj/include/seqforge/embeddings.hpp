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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqforge/corpus.hpp"

namespace seqforge {

// Pretrained token vectors, GloVe text layout.
struct EmbeddingTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> entries;

  bool contains(const std::string& token) const { return entries.count(token) != 0; }
};

struct EmbeddingLoadStats {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  bool had_header = false;
};

// One entry per line: token then `expected_dimension` space-separated numbers.
// A leading "count dim" line (word2vec text header) is skipped. Lines of the
// wrong arity or with non-finite values are skipped and counted.
// Throws FileUnreadable, EmptyTable.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dimension,
                               EmbeddingLoadStats* stats = nullptr);
EmbeddingTable parse_embeddings(std::string_view content, std::size_t expected_dimension,
                                EmbeddingLoadStats* stats = nullptr);

// Lowercase plus every decimal digit mapped to '0'.
std::string normalize_token(std::string_view text);

inline constexpr int kPadIndex = 0;
inline constexpr int kUnkIndex = 1;
inline constexpr std::string_view kPadSymbol = "<PAD>";
inline constexpr std::string_view kUnkSymbol = "<UNK>";

// Token, character and label index spaces. Tokens and characters reserve
// PAD=0 and UNK=1; characters are UTF-8 encoded scalar values.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::string> chars,
             std::vector<std::string> labels);

  std::size_t token_count() const { return tokens_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  std::size_t label_count() const { return labels_.size(); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& chars() const { return chars_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Exact lookups; -1 when absent.
  int find_token(const std::string& token) const;
  int find_char(const std::string& ch) const;
  int find_label(const std::string& label) const;

  // Exact, then normalized, then UNK.
  int lookup_token(std::string_view token) const;
  // Per-scalar character indices, UNK for unseen characters.
  std::vector<int> lookup_chars(std::string_view token) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && chars_ == other.chars_ && labels_ == other.labels_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> chars_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> token_index_;
  std::unordered_map<std::string, int> char_index_;
  std::unordered_map<std::string, int> label_index_;
};

// Free-function form of Vocabulary::lookup_token.
int lookup_token(const Vocabulary& vocab, std::string_view token);

struct VocabOptions {
  TaggingFormat tagging_format = TaggingFormat::kBio;
  // When true, pretrained tokens that occur in none of `other_splits` nor in
  // train are left out of the token vocabulary.
  bool vocab_only_embedded = false;
};

// Token vocab: train tokens plus embedding-table tokens; char vocab: train
// characters (case-sensitive); labels: "O" plus expansions of the gold
// categories. All orders are lexicographic after the reserved entries.
// `other_splits` are consulted only to filter embedding tokens.
// Throws EmptySplit.
Vocabulary build_vocab(const DatasetSplit& train, const EmbeddingTable& embeddings,
                       const VocabOptions& options = {},
                       std::span<const DatasetSplit* const> other_splits = {});

}  // namespace seqforge
