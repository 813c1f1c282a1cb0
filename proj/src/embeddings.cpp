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

#include "seqforge/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>

#include <spdlog/spdlog.h>

#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"
#include "seqforge/utf8.hpp"

namespace seqforge {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool is_count_header(const std::vector<std::string_view>& fields) {
  if (fields.size() != 2) return false;
  for (auto f : fields) {
    for (char c : f) {
      if (c < '0' || c > '9') return false;
    }
  }
  return true;
}

}  // namespace

EmbeddingTable parse_embeddings(std::string_view content, std::size_t expected_dimension,
                                EmbeddingLoadStats* stats) {
  EmbeddingTable table;
  table.dimension = expected_dimension;
  EmbeddingLoadStats local;
  content = utf8::strip_bom(content);

  std::size_t pos = 0;
  bool first = true;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto fields = split_spaces(line);
    if (first) {
      first = false;
      if (is_count_header(fields)) {
        local.had_header = true;
        continue;
      }
    }
    if (fields.size() != expected_dimension + 1) {
      ++local.skipped;
      continue;
    }
    std::vector<double> vec(expected_dimension);
    bool ok = true;
    for (std::size_t d = 0; d < expected_dimension && ok; ++d) ok = parse_double(fields[d + 1], vec[d]);
    if (!ok) {
      ++local.skipped;
      continue;
    }
    // Later duplicates overwrite earlier ones.
    table.entries[std::string(fields[0])] = std::move(vec);
  }
  local.loaded = table.entries.size();
  if (local.skipped > 0) {
    spdlog::warn("embedding file: skipped {} line(s) not matching dimension {}", local.skipped,
                 expected_dimension);
  }
  if (stats != nullptr) *stats = local;
  if (table.entries.empty()) {
    throw Error(ErrorCode::kEmptyTable, "embedding file has no valid " +
                                            std::to_string(expected_dimension) +
                                            "-dimensional entries");
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dimension,
                               EmbeddingLoadStats* stats) {
  return parse_embeddings(read_file(path), expected_dimension, stats);
}

std::string normalize_token(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  for (char32_t& c : cps) {
    if (c >= U'A' && c <= U'Z') {
      c = c - U'A' + U'a';
    } else if (c >= U'0' && c <= U'9') {
      c = U'0';
    } else if ((c >= 0xC0 && c <= 0xDE && c != 0xD7) || (c >= 0x391 && c <= 0x3A9 && c != 0x3A2)) {
      c += 0x20;
    } else if (c >= 0x410 && c <= 0x42F) {
      c += 0x20;
    }
  }
  return utf8::encode(cps);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::string> chars,
                       std::vector<std::string> labels)
    : tokens_(std::move(tokens)), chars_(std::move(chars)), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) token_index_.emplace(tokens_[i], static_cast<int>(i));
  for (std::size_t i = 0; i < chars_.size(); ++i) char_index_.emplace(chars_[i], static_cast<int>(i));
  for (std::size_t i = 0; i < labels_.size(); ++i) label_index_.emplace(labels_[i], static_cast<int>(i));
}

int Vocabulary::find_token(const std::string& token) const {
  auto it = token_index_.find(token);
  return it == token_index_.end() ? -1 : it->second;
}

int Vocabulary::find_char(const std::string& ch) const {
  auto it = char_index_.find(ch);
  return it == char_index_.end() ? -1 : it->second;
}

int Vocabulary::find_label(const std::string& label) const {
  auto it = label_index_.find(label);
  return it == label_index_.end() ? -1 : it->second;
}

int Vocabulary::lookup_token(std::string_view token) const {
  const std::string exact(token);
  if (int i = find_token(exact); i >= 0) return i;
  if (int i = find_token(normalize_token(token)); i >= 0) return i;
  return kUnkIndex;
}

std::vector<int> Vocabulary::lookup_chars(std::string_view token) const {
  std::vector<int> out;
  for (char32_t c : utf8::decode(token)) {
    const int i = find_char(utf8::encode(c));
    out.push_back(i >= 0 ? i : kUnkIndex);
  }
  return out;
}

int lookup_token(const Vocabulary& vocab, std::string_view token) {
  return vocab.lookup_token(token);
}

Vocabulary build_vocab(const DatasetSplit& train, const EmbeddingTable& embeddings,
                       const VocabOptions& options,
                       std::span<const DatasetSplit* const> other_splits) {
  std::size_t sentence_count = 0;
  std::set<std::string> tokens;
  std::set<std::string> chars;
  std::set<std::string> categories;
  for (const auto& doc : train.documents) {
    for (const auto& sentence : doc.sentences) {
      if (!sentence.tokens.empty()) ++sentence_count;
      for (const auto& tok : sentence.tokens) {
        tokens.insert(tok.text);
        for (char32_t c : utf8::decode(tok.text)) chars.insert(utf8::encode(c));
      }
    }
    for (const auto& span : doc.spans) categories.insert(span.category);
  }
  if (sentence_count == 0) {
    throw Error(ErrorCode::kEmptySplit, "training split has no sentences");
  }

  std::set<std::string> observed;
  if (options.vocab_only_embedded) {
    auto note = [&](const DatasetSplit& split) {
      for (const auto& doc : split.documents) {
        for (const auto& sentence : doc.sentences) {
          for (const auto& tok : sentence.tokens) {
            observed.insert(tok.text);
            observed.insert(normalize_token(tok.text));
          }
        }
      }
    };
    note(train);
    for (const DatasetSplit* split : other_splits) {
      if (split != nullptr) note(*split);
    }
  }
  for (const auto& [token, vec] : embeddings.entries) {
    if (!options.vocab_only_embedded || observed.count(token) != 0) tokens.insert(token);
  }
  tokens.erase(std::string(kPadSymbol));
  tokens.erase(std::string(kUnkSymbol));

  std::vector<std::string> token_list{std::string(kPadSymbol), std::string(kUnkSymbol)};
  token_list.insert(token_list.end(), tokens.begin(), tokens.end());
  std::vector<std::string> char_list{std::string(kPadSymbol), std::string(kUnkSymbol)};
  char_list.insert(char_list.end(), chars.begin(), chars.end());
  const std::vector<std::string> cats(categories.begin(), categories.end());
  return Vocabulary(std::move(token_list), std::move(char_list),
                    expand_labels(cats, options.tagging_format));
}

}  // namespace seqforge
