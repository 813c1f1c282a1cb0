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

#include "seqforge/corpus.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "seqforge/error.hpp"
#include "seqforge/utf8.hpp"

namespace seqforge {

std::string_view split_name(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kValid: return "valid";
    case SplitName::kTest: return "test";
    case SplitName::kDeploy: return "deploy";
  }
  return "train";
}

std::optional<SplitName> parse_split_name(std::string_view name) {
  if (name == "train") return SplitName::kTrain;
  if (name == "valid") return SplitName::kValid;
  if (name == "test") return SplitName::kTest;
  if (name == "deploy") return SplitName::kDeploy;
  return std::nullopt;
}

LabelParts split_label(std::string_view label) {
  if (label == kOutsideLabel) return {'O', ""};
  if (label.size() >= 3 && label[1] == '-') {
    const char p = label[0];
    if (p == 'B' || p == 'I' || p == 'E' || p == 'S') {
      return {p, std::string(label.substr(2))};
    }
  }
  throw Error(ErrorCode::kUnknownLabelForm,
              "unknown label form '" + std::string(label) + "'");
}

namespace {

// Indices of the first and last token covered by [start, end), or nullopt
// when the span covers no token.
std::optional<std::pair<std::size_t, std::size_t>> covering_tokens(
    std::span<const Token> tokens, const EntitySpan& span) {
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end > span.start && tokens[i].start < span.end) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  return std::make_pair(*first, last);
}

}  // namespace

std::vector<std::string> spans_to_labels(std::span<const Token> tokens,
                                         std::span<const EntitySpan> spans,
                                         SpanAlignment alignment) {
  std::vector<std::string> labels(tokens.size(), std::string(kOutsideLabel));

  std::vector<const EntitySpan*> ordered;
  ordered.reserve(spans.size());
  for (const auto& s : spans) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->start != b->start ? a->start < b->start : a->end < b->end;
  });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->start < ordered[i - 1]->end) {
      throw Error(ErrorCode::kOverlappingSpans,
                  "spans " + ordered[i - 1]->id + " and " + ordered[i]->id + " overlap");
    }
  }

  std::vector<bool> taken(tokens.size(), false);
  for (const EntitySpan* span : ordered) {
    const auto range = covering_tokens(tokens, *span);
    if (!range) {
      // The span lies entirely outside this token list (other sentence, or
      // whitespace only). Nothing to label here.
      continue;
    }
    const auto [first, last] = *range;
    const bool aligned = tokens[first].start == span->start && tokens[last].end == span->end;
    if (!aligned) {
      if (alignment == SpanAlignment::kStrict) {
        throw Error(ErrorCode::kSpanCrossesToken,
                    "span " + span->id + " [" + std::to_string(span->start) + "," +
                        std::to_string(span->end) + ") does not align with token boundaries");
      }
      spdlog::warn("span {} [{},{}) snapped to tokens [{},{})", span->id, span->start,
                   span->end, tokens[first].start, tokens[last].end);
    }
    bool clash = false;
    for (std::size_t t = first; t <= last; ++t) clash = clash || taken[t];
    if (clash) {
      spdlog::warn("span {} shares a token with an earlier span after snapping; dropped", span->id);
      continue;
    }
    for (std::size_t t = first; t <= last; ++t) {
      taken[t] = true;
      labels[t] = (t == first ? "B-" : "I-") + span->category;
    }
  }
  return labels;
}

std::vector<std::string> to_bio(std::span<const std::string> labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  std::string prev_cat;
  bool prev_open = false;  // previous label can be continued by I-
  for (const auto& label : labels) {
    const LabelParts parts = split_label(label);
    switch (parts.prefix) {
      case 'O':
        out.emplace_back(kOutsideLabel);
        prev_open = false;
        break;
      case 'B':
      case 'S':
        out.push_back("B-" + parts.category);
        prev_open = parts.prefix == 'B';
        break;
      case 'I':
      case 'E':
        if (prev_open && prev_cat == parts.category) {
          out.push_back("I-" + parts.category);
        } else {
          out.push_back("B-" + parts.category);
        }
        prev_open = parts.prefix == 'I';
        break;
    }
    prev_cat = parts.category;
  }
  return out;
}

std::vector<std::string> to_bioes(std::span<const std::string> labels) {
  std::vector<std::string> bio = to_bio(labels);
  std::vector<std::string> out(bio.size());
  for (std::size_t i = 0; i < bio.size(); ++i) {
    const LabelParts parts = split_label(bio[i]);
    if (parts.prefix == 'O') {
      out[i] = bio[i];
      continue;
    }
    const bool continues = i + 1 < bio.size() && bio[i + 1] == "I-" + parts.category;
    if (parts.prefix == 'B') {
      out[i] = (continues ? "B-" : "S-") + parts.category;
    } else {
      out[i] = (continues ? "I-" : "E-") + parts.category;
    }
  }
  return out;
}

std::vector<EntitySpan> labels_to_spans(std::span<const Token> tokens,
                                        std::span<const std::string> labels,
                                        std::string_view text, std::size_t first_id) {
  if (labels.size() != tokens.size()) {
    throw Error(ErrorCode::kShapeMismatch, "labels_to_spans: " + std::to_string(labels.size()) +
                                               " labels for " + std::to_string(tokens.size()) +
                                               " tokens");
  }
  const std::vector<std::string> bio = to_bio(labels);
  const std::u32string cps = utf8::decode(text);
  auto surface = [&](std::size_t s, std::size_t e) {
    s = std::min(s, cps.size());
    e = std::min(e, cps.size());
    return utf8::encode(std::u32string_view(cps).substr(s, e - s));
  };

  std::vector<EntitySpan> spans;
  std::size_t next_id = first_id;
  std::size_t i = 0;
  while (i < bio.size()) {
    const LabelParts parts = split_label(bio[i]);
    if (parts.prefix == 'O') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < bio.size() && bio[j] == "I-" + parts.category) ++j;
    EntitySpan span;
    span.id = "T" + std::to_string(next_id++);
    span.category = parts.category;
    span.start = tokens[i].start;
    span.end = tokens[j - 1].end;
    span.surface = surface(span.start, span.end);
    spans.push_back(std::move(span));
    i = j;
  }
  return spans;
}

std::vector<std::string> expand_labels(std::span<const std::string> categories,
                                       TaggingFormat format) {
  std::set<std::string> sorted(categories.begin(), categories.end());
  std::vector<std::string> out{std::string(kOutsideLabel)};
  for (const auto& cat : sorted) {
    out.push_back("B-" + cat);
    out.push_back("I-" + cat);
    if (format == TaggingFormat::kBioes) {
      out.push_back("E-" + cat);
      out.push_back("S-" + cat);
    }
  }
  return out;
}

std::string_view violation_kind_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kBadOffsets: return "BadOffsets";
    case Violation::Kind::kSurfaceMismatch: return "SurfaceMismatch";
    case Violation::Kind::kDuplicateId: return "DuplicateId";
    case Violation::Kind::kOverlap: return "Overlap";
  }
  return "Unknown";
}

std::vector<Violation> validate_document(const Document& doc) {
  std::vector<Violation> out;
  const std::u32string cps = utf8::decode(doc.text);

  std::map<std::string, int> seen;
  for (const auto& span : doc.spans) {
    if (++seen[span.id] == 2) {
      out.push_back({Violation::Kind::kDuplicateId, span.id, "duplicate id \"" + span.id + "\""});
    }
  }

  std::vector<const EntitySpan*> good;
  for (const auto& span : doc.spans) {
    if (!(span.start < span.end && span.end <= cps.size())) {
      out.push_back({Violation::Kind::kBadOffsets, span.id,
                     "offsets [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                         ") invalid for text of length " + std::to_string(cps.size())});
      continue;
    }
    const std::string slice =
        utf8::encode(std::u32string_view(cps).substr(span.start, span.end - span.start));
    if (slice != span.surface) {
      out.push_back({Violation::Kind::kSurfaceMismatch, span.id,
                     "surface \"" + span.surface + "\" differs from text \"" + slice + "\""});
    }
    good.push_back(&span);
  }

  std::sort(good.begin(), good.end(), [](const auto* a, const auto* b) {
    return a->start != b->start ? a->start < b->start : a->end < b->end;
  });
  std::size_t reach = 0;
  const EntitySpan* reach_span = nullptr;
  for (const EntitySpan* span : good) {
    if (reach_span != nullptr && span->start < reach) {
      out.push_back({Violation::Kind::kOverlap, span->id,
                     "overlaps " + reach_span->id});
    }
    if (span->end > reach) {
      reach = span->end;
      reach_span = span;
    }
  }
  return out;
}

}  // namespace seqforge
