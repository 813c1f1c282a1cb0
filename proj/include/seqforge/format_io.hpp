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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqforge/corpus.hpp"

namespace seqforge {

// Rule tokenizer: maximal runs of letters/digits form tokens, every other
// non-space character is a token of its own. Offsets are scalar values
// relative to the start of `text`.
std::vector<Token> tokenize(std::string_view text);

struct SentenceRange {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const SentenceRange&) const = default;
};

// Splits after '.', '!' or '?' when followed by whitespace and then an
// uppercase letter or the end of text; a blank line always splits. Ranges
// are trimmed of surrounding whitespace and never empty.
std::vector<SentenceRange> split_sentences(std::string_view text);

// Fills doc.sentences (BIO labels) from doc.text and doc.spans. Sentence
// ranges crossed by a span are merged. With kStrict, spans that do not
// align with tokens raise SpanCrossesToken.
void annotate_sentences(Document& doc, SpanAlignment alignment = SpanAlignment::kStrict);

struct BratPair {
  std::string text;
  std::string ann;
};

// Consumes T-lines only; A/R/E/N/M/# lines are skipped with a warning.
// Throws MalformedAnnLine, OffsetOutOfRange or SurfaceMismatch.
Document parse_brat(const BratPair& pair, std::string doc_id = {});
BratPair write_brat(const Document& doc);

// CoNLL columns: token first, label in `label_column` (default: last).
// Blank lines end sentences, "-DOCSTART-" lines end documents. Sentences of
// the returned documents carry the file's own tokens and BIO labels.
std::vector<Document> parse_conll(std::string_view content,
                                  std::optional<std::size_t> label_column = std::nullopt,
                                  std::string_view id_prefix = "doc");
std::string write_conll(std::span<const Document> docs,
                        SpanAlignment alignment = SpanAlignment::kStrict);

// --- on-disk layout ---------------------------------------------------------

enum class CorpusFormat { kBrat, kConll };

struct SplitSource {
  CorpusFormat format = CorpusFormat::kBrat;
  std::filesystem::path conll_file;  // set for kConll
};

// Detects the format of a split directory: a *.conll file selects CoNLL,
// otherwise *.txt/*.ann pairs are read as BRAT.
SplitSource detect_split_format(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Loads one split directory. Gold splits (everything but deploy) require a
// .ann next to every .txt. Documents come back with sentences annotated.
DatasetSplit load_split(const std::filesystem::path& dir, SplitName name);

// Loads every split subdirectory that exists under `folder`.
std::map<SplitName, DatasetSplit> load_dataset(const std::filesystem::path& folder);

// Writes <dir>/<doc.id>.txt and .ann.
void write_brat_document(const std::filesystem::path& dir, const Document& doc);

}  // namespace seqforge
