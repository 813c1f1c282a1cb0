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

#include "seqforge/format_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "seqforge/error.hpp"
#include "seqforge/utf8.hpp"

namespace fs = std::filesystem;

namespace seqforge {
namespace {

std::vector<Token> tokenize_codepoints(std::u32string_view cps, std::size_t base) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (utf8::is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (utf8::is_word_char(cps[i])) {
      while (j < cps.size() && utf8::is_word_char(cps[j])) ++j;
    }
    tokens.push_back({utf8::encode(cps.substr(i, j - i)), base + i, base + j});
    i = j;
  }
  return tokens;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_offset(std::string_view s, std::size_t& out) {
  if (s.empty() || s.size() > 18) return false;
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  out = v;
  return true;
}

// Numeric part of a "T12" id for ordering; ids without one sort last.
std::pair<std::size_t, std::string> id_key(const std::string& id) {
  std::size_t n = 0;
  if (id.size() > 1 && parse_offset(std::string_view(id).substr(1), n)) return {n, id};
  return {static_cast<std::size_t>(-1), id};
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  return tokenize_codepoints(utf8::decode(text), 0);
}

std::vector<SentenceRange> split_sentences(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  const std::size_t n = cps.size();
  std::vector<std::size_t> cuts;  // exclusive ends of raw segments

  for (std::size_t i = 0; i < n; ++i) {
    const char32_t c = cps[i];
    if (c == U'.' || c == U'!' || c == U'?') {
      if (i + 1 < n && utf8::is_space(cps[i + 1])) {
        std::size_t j = i + 1;
        while (j < n && utf8::is_space(cps[j])) ++j;
        if (j == n || utf8::is_upper(cps[j])) cuts.push_back(i + 1);
      }
    } else if (c == U'\n') {
      std::size_t j = i + 1;
      while (j < n && (cps[j] == U' ' || cps[j] == U'\t' || cps[j] == U'\r')) ++j;
      if (j < n && cps[j] == U'\n') cuts.push_back(i);
    }
  }
  cuts.push_back(n);

  std::vector<SentenceRange> ranges;
  std::size_t begin = 0;
  for (std::size_t cut : cuts) {
    if (cut < begin) continue;
    std::size_t s = begin;
    std::size_t e = cut;
    while (s < e && utf8::is_space(cps[s])) ++s;
    while (e > s && utf8::is_space(cps[e - 1])) --e;
    if (e > s) ranges.push_back({s, e});
    begin = cut;
  }
  return ranges;
}

void annotate_sentences(Document& doc, SpanAlignment alignment) {
  const std::u32string cps = utf8::decode(doc.text);
  std::vector<SentenceRange> ranges = split_sentences(doc.text);

  // Merge neighbouring ranges whenever a span straddles their boundary.
  std::vector<SentenceRange> merged;
  for (const auto& r : ranges) {
    if (!merged.empty()) {
      const std::size_t boundary_lo = merged.back().end;
      const std::size_t boundary_hi = r.start;
      const bool crossed = std::any_of(doc.spans.begin(), doc.spans.end(), [&](const auto& s) {
        return s.start < boundary_hi && s.end > boundary_lo;
      });
      if (crossed) {
        merged.back().end = r.end;
        continue;
      }
    }
    merged.push_back(r);
  }

  doc.sentences.clear();
  std::vector<bool> covered(doc.spans.size(), false);
  for (const auto& r : merged) {
    LabeledSentence sentence;
    sentence.tokens =
        tokenize_codepoints(std::u32string_view(cps).substr(r.start, r.end - r.start), r.start);
    std::vector<EntitySpan> local;
    for (std::size_t k = 0; k < doc.spans.size(); ++k) {
      const auto& s = doc.spans[k];
      if (s.start < r.end && s.end > r.start) {
        local.push_back(s);
        covered[k] = true;
      }
    }
    sentence.labels = spans_to_labels(sentence.tokens, local, alignment);
    doc.sentences.push_back(std::move(sentence));
  }

  for (std::size_t k = 0; k < doc.spans.size(); ++k) {
    if (covered[k]) continue;
    const auto& s = doc.spans[k];
    if (alignment == SpanAlignment::kStrict) {
      throw Error(ErrorCode::kSpanCrossesToken,
                  "span " + s.id + " in document " + doc.id + " covers no token");
    }
    spdlog::warn("span {} in document {} covers no token; ignored", s.id, doc.id);
  }
}

Document parse_brat(const BratPair& pair, std::string doc_id) {
  Document doc;
  doc.id = std::move(doc_id);
  doc.text = std::string(utf8::strip_bom(pair.text));
  const std::u32string cps = utf8::decode(doc.text);

  const std::vector<std::string_view> lines = split_lines(utf8::strip_bom(pair.ann));
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    const std::string where = "line " + std::to_string(ln + 1) +
                              (doc.id.empty() ? std::string() : " of " + doc.id + ".ann");
    if (line.empty()) continue;
    if (line[0] != 'T') {
      spdlog::warn("skipping non-entity annotation at {}", where);
      continue;
    }
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 =
        tab1 == std::string_view::npos ? std::string_view::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string_view::npos || tab2 == std::string_view::npos || tab1 < 2) {
      throw Error(ErrorCode::kMalformedAnnLine, "malformed annotation at " + where);
    }
    const std::string_view id = line.substr(0, tab1);
    const std::string_view middle = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string_view surface = line.substr(tab2 + 1);
    if (middle.find(';') != std::string_view::npos) {
      spdlog::warn("skipping discontinuous entity {} at {}", id, where);
      continue;
    }
    const auto fields = split_whitespace(middle);
    EntitySpan span;
    if (fields.size() != 3 || !parse_offset(fields[1], span.start) ||
        !parse_offset(fields[2], span.end)) {
      throw Error(ErrorCode::kMalformedAnnLine, "malformed annotation at " + where);
    }
    span.id = std::string(id);
    span.category = std::string(fields[0]);
    span.surface = std::string(surface);
    if (!(span.start < span.end && span.end <= cps.size())) {
      throw Error(ErrorCode::kOffsetOutOfRange,
                  "offsets [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                      ") out of range for text of length " + std::to_string(cps.size()) + " at " +
                      where);
    }
    const std::string slice =
        utf8::encode(std::u32string_view(cps).substr(span.start, span.end - span.start));
    if (slice != span.surface) {
      throw Error(ErrorCode::kSurfaceMismatch, "surface \"" + span.surface +
                                                   "\" does not match text \"" + slice + "\" at " +
                                                   where);
    }
    doc.spans.push_back(std::move(span));
  }
  return doc;
}

BratPair write_brat(const Document& doc) {
  std::vector<const EntitySpan*> ordered;
  for (const auto& s : doc.spans) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return id_key(a->id) < id_key(b->id); });
  BratPair pair;
  pair.text = doc.text;
  for (const EntitySpan* s : ordered) {
    pair.ann += s->id + '\t' + s->category + ' ' + std::to_string(s->start) + ' ' +
                std::to_string(s->end) + '\t' + s->surface + '\n';
  }
  return pair;
}

std::vector<Document> parse_conll(std::string_view content,
                                  std::optional<std::size_t> label_column,
                                  std::string_view id_prefix) {
  std::vector<Document> docs;
  const std::vector<std::string_view> lines = split_lines(utf8::strip_bom(content));

  struct RawSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> labels;
  };
  std::vector<RawSentence> pending_doc;
  RawSentence current;

  auto flush_sentence = [&] {
    if (!current.tokens.empty()) pending_doc.push_back(std::move(current));
    current = {};
  };
  auto flush_document = [&] {
    flush_sentence();
    if (pending_doc.empty()) return;
    Document doc;
    doc.id = std::string(id_prefix) + "-" + std::to_string(docs.size() + 1);
    std::u32string text;
    std::vector<EntitySpan> spans;
    for (std::size_t si = 0; si < pending_doc.size(); ++si) {
      if (si > 0) text += U'\n';
      LabeledSentence sentence;
      for (std::size_t ti = 0; ti < pending_doc[si].tokens.size(); ++ti) {
        if (ti > 0) text += U' ';
        const std::u32string tok = utf8::decode(pending_doc[si].tokens[ti]);
        const std::size_t start = text.size();
        text += tok;
        sentence.tokens.push_back({pending_doc[si].tokens[ti], start, text.size()});
      }
      sentence.labels = to_bio(pending_doc[si].labels);
      doc.sentences.push_back(std::move(sentence));
    }
    doc.text = utf8::encode(text);
    for (const auto& sentence : doc.sentences) {
      auto found = labels_to_spans(sentence.tokens, sentence.labels, doc.text, doc.spans.size() + 1);
      for (auto& s : found) doc.spans.push_back(std::move(s));
    }
    docs.push_back(std::move(doc));
    pending_doc.clear();
  };

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto cols = split_whitespace(lines[ln]);
    if (cols.empty()) {
      flush_sentence();
      continue;
    }
    if (cols[0] == "-DOCSTART-") {
      flush_document();
      continue;
    }
    const std::size_t col = label_column.value_or(cols.size() - 1);
    if (cols.size() < 2 || col == 0 || col >= cols.size()) {
      throw Error(ErrorCode::kMalformedLine,
                  "CoNLL line " + std::to_string(ln + 1) + " has too few columns");
    }
    std::string label(cols[col]);
    try {
      split_label(label);
    } catch (const Error&) {
      throw Error(ErrorCode::kUnknownLabelForm, "unknown label form '" + label +
                                                    "' on CoNLL line " + std::to_string(ln + 1));
    }
    current.tokens.emplace_back(cols[0]);
    current.labels.push_back(std::move(label));
  }
  flush_document();
  return docs;
}

std::string write_conll(std::span<const Document> docs, SpanAlignment alignment) {
  std::string out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) out += "-DOCSTART- O\n\n";
    Document doc = docs[d];
    if (doc.sentences.empty()) {
      annotate_sentences(doc, alignment);
    } else {
      for (auto& sentence : doc.sentences) {
        std::vector<EntitySpan> local;
        const std::size_t lo = sentence.tokens.empty() ? 0 : sentence.tokens.front().start;
        const std::size_t hi = sentence.tokens.empty() ? 0 : sentence.tokens.back().end;
        for (const auto& s : doc.spans) {
          if (s.start < hi && s.end > lo) local.push_back(s);
        }
        sentence.labels = spans_to_labels(sentence.tokens, local, alignment);
      }
    }
    for (const auto& sentence : doc.sentences) {
      if (sentence.tokens.empty()) continue;
      for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
        out += sentence.tokens[t].text + ' ' + sentence.labels[t] + '\n';
      }
      out += '\n';
    }
  }
  return out;
}

// --- on-disk layout ---------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename into " + path.string() + ": " + ec.message());
}

SplitSource detect_split_format(const fs::path& dir) {
  std::vector<fs::path> conll;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".conll") {
      conll.push_back(entry.path());
    }
  }
  if (conll.empty()) return {CorpusFormat::kBrat, {}};
  std::sort(conll.begin(), conll.end());
  if (conll.size() > 1) {
    spdlog::warn("{} holds {} CoNLL files; using {}", dir.string(), conll.size(),
                 conll.front().filename().string());
  }
  return {CorpusFormat::kConll, conll.front()};
}

DatasetSplit load_split(const fs::path& dir, SplitName name) {
  DatasetSplit split;
  split.name = name;
  if (!fs::is_directory(dir)) return split;
  const bool gold = name != SplitName::kDeploy;
  const SplitSource source = detect_split_format(dir);

  if (source.format == CorpusFormat::kConll) {
    split.documents = parse_conll(read_file(source.conll_file), std::nullopt,
                                  source.conll_file.stem().string());
    return split;
  }

  std::vector<fs::path> texts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") texts.push_back(entry.path());
  }
  std::sort(texts.begin(), texts.end());
  for (const auto& txt : texts) {
    fs::path ann = txt;
    ann.replace_extension(".ann");
    BratPair pair;
    pair.text = read_file(txt);
    if (fs::exists(ann)) {
      pair.ann = read_file(ann);
    } else if (gold) {
      throw Error(ErrorCode::kMissingAnnotation,
                  "gold split '" + std::string(split_name(name)) + "' has no " + ann.string());
    }
    Document doc = parse_brat(pair, txt.stem().string());
    annotate_sentences(doc, gold ? SpanAlignment::kStrict : SpanAlignment::kSnapOutward);
    split.documents.push_back(std::move(doc));
  }
  return split;
}

std::map<SplitName, DatasetSplit> load_dataset(const fs::path& folder) {
  std::map<SplitName, DatasetSplit> out;
  for (SplitName name : {SplitName::kTrain, SplitName::kValid, SplitName::kTest, SplitName::kDeploy}) {
    const fs::path dir = folder / std::string(split_name(name));
    if (fs::is_directory(dir)) out.emplace(name, load_split(dir, name));
  }
  return out;
}

void write_brat_document(const fs::path& dir, const Document& doc) {
  fs::create_directories(dir);
  const BratPair pair = write_brat(doc);
  write_file_atomic(dir / (doc.id + ".txt"), pair.text);
  write_file_atomic(dir / (doc.id + ".ann"), pair.ann);
}

}  // namespace seqforge
