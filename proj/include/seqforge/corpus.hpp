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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqforge {

inline constexpr std::string_view kOutsideLabel = "O";

// A character-offset entity annotation, the BRAT "T" line unit.
// Offsets are Unicode scalar values, end exclusive.
struct EntitySpan {
  std::string id;
  std::string category;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  bool operator==(const EntitySpan&) const = default;
};

struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct LabeledSentence {
  std::vector<Token> tokens;
  std::vector<std::string> labels;  // same length as tokens

  bool operator==(const LabeledSentence&) const = default;
};

struct Document {
  std::string id;
  std::string text;  // UTF-8
  std::vector<EntitySpan> spans;
  std::vector<LabeledSentence> sentences;
};

enum class SplitName { kTrain, kValid, kTest, kDeploy };

std::string_view split_name(SplitName split);
std::optional<SplitName> parse_split_name(std::string_view name);

struct DatasetSplit {
  SplitName name = SplitName::kTrain;
  std::vector<Document> documents;
};

enum class TaggingFormat { kBio, kBioes };

// How span boundaries that fall inside a token are treated.
enum class SpanAlignment {
  kStrict,       // SpanCrossesToken error (training data)
  kSnapOutward,  // widen to the smallest covering token range, with a warning
};

// Decomposed label: prefix is one of 'O', 'B', 'I', 'E', 'S'.
struct LabelParts {
  char prefix = 'O';
  std::string category;
};

// Throws UnknownLabelForm for anything other than O or [BIES]-<cat>.
LabelParts split_label(std::string_view label);

// BIO labels from non-overlapping spans. Spans may be given in any order.
std::vector<std::string> spans_to_labels(std::span<const Token> tokens,
                                         std::span<const EntitySpan> spans,
                                         SpanAlignment alignment = SpanAlignment::kStrict);

// Decodes BIO or BIOES labels into spans. Never fails on well-formed label
// strings: an I-/E- that does not continue a same-category run starts a new
// entity. Ids are T<first_id>, T<first_id+1>, ... in token order. `text` is
// the document text the token offsets refer to; it supplies span surfaces.
std::vector<EntitySpan> labels_to_spans(std::span<const Token> tokens,
                                        std::span<const std::string> labels,
                                        std::string_view text,
                                        std::size_t first_id = 1);

// Relabels BIO runs into BIOES. Input is repaired first.
std::vector<std::string> to_bioes(std::span<const std::string> labels);
// Converts BIO, IOB1 or BIOES into well-formed BIO using the repair rule.
std::vector<std::string> to_bio(std::span<const std::string> labels);

// Label inventory for a category set, "O" first, then for each sorted
// category B-, I- (BIO) or B-, I-, E-, S- (BIOES).
std::vector<std::string> expand_labels(std::span<const std::string> categories,
                                       TaggingFormat format);

struct Violation {
  enum class Kind { kBadOffsets, kSurfaceMismatch, kDuplicateId, kOverlap };
  Kind kind;
  std::string span_id;
  std::string message;

  bool operator==(const Violation&) const = default;
};

std::string_view violation_kind_name(Violation::Kind kind);

// Every invariant violation in doc.spans; empty means valid.
std::vector<Violation> validate_document(const Document& doc);

}  // namespace seqforge
