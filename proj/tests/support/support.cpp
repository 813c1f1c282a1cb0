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

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <unistd.h>

#include "seqforge/config.hpp"
#include "seqforge/crf.hpp"

namespace fs = std::filesystem;

namespace seqforge::testing {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

CrfInstance random_crf_instance(Rng& rng, std::size_t length, std::size_t labels) {
  CrfInstance inst{random_matrix(rng, length, labels, 2.0),
                   random_matrix(rng, labels + 2, labels + 2, 2.0)};
  // Entries that no path can use are zeroed, mirroring the model's layout.
  const std::size_t start = labels, end = labels + 1;
  for (std::size_t i = 0; i < labels + 2; ++i) {
    inst.transitions(i, start) = 0.0;
    inst.transitions(end, i) = 0.0;
    inst.transitions(i, end) = i == end || i == start ? 0.0 : inst.transitions(i, end);
  }
  return inst;
}

double path_score(const Matrix& emissions, const Matrix& transitions, const std::vector<int>& path) {
  const std::size_t k = emissions.cols();
  double s = transitions(k, static_cast<std::size_t>(path.front()));
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(t, static_cast<std::size_t>(path[t]));
    if (t > 0) s += transitions(static_cast<std::size_t>(path[t - 1]), static_cast<std::size_t>(path[t]));
  }
  return s + transitions(static_cast<std::size_t>(path.back()), k + 1);
}

std::vector<std::vector<int>> all_paths(std::size_t length, std::size_t labels) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(length, 0);
  for (;;) {
    out.push_back(current);
    std::size_t pos = length;
    while (pos > 0) {
      --pos;
      if (static_cast<std::size_t>(++current[pos]) < labels) break;
      current[pos] = 0;
      if (pos == 0) return out;
    }
    if (length == 0) return out;
  }
}

Enumeration enumerate(const Matrix& emissions, const Matrix& transitions, double tie_tolerance) {
  const auto paths = all_paths(emissions.rows(), emissions.cols());
  std::vector<double> scores;
  scores.reserve(paths.size());
  for (const auto& p : paths) scores.push_back(path_score(emissions, transitions, p));

  Enumeration e;
  const double m = *std::max_element(scores.begin(), scores.end());
  long double total = 0.0L;
  for (double s : scores) total += std::exp(static_cast<long double>(s - m));
  e.log_partition = m + static_cast<double>(std::log(total));

  auto reversed_less = [](const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  };
  e.best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (scores[i] > e.best_score + tie_tolerance) {
      e.best_score = scores[i];
      e.best = paths[i];
    } else if (std::abs(scores[i] - e.best_score) <= tie_tolerance &&
               reversed_less(paths[i], e.best)) {
      e.best = paths[i];
      e.best_score = std::max(e.best_score, scores[i]);
    }
  }
  e.best_score = path_score(emissions, transitions, e.best);
  return e;
}

TinyModel random_tiny_model(Rng& rng, bool using_crf, bool using_char_lstm, std::size_t max_len) {
  TinyModel m;
  const std::size_t num_labels = rng.index(2, 4);
  std::vector<std::string> labels{"O", "B-A", "I-A", "B-B"};
  labels.resize(num_labels);
  m.vocab = Vocabulary({"<PAD>", "<UNK>", "alpha", "beta", "gamma"},
                       {"<PAD>", "<UNK>", "a", "b", "c"}, labels);

  Architecture arch;
  arch.using_char_lstm = using_char_lstm;
  arch.using_crf = using_crf;
  arch.char_vocab = m.vocab.char_count();
  arch.char_embedding = using_char_lstm ? rng.index(1, 4) : 0;
  arch.char_hidden = using_char_lstm ? rng.index(1, 4) : 0;
  arch.token_vocab = m.vocab.token_count();
  arch.token_embedding = rng.index(1, 4);
  arch.token_hidden = rng.index(1, 4);
  arch.num_labels = num_labels;

  EmbeddingTable none;
  none.dimension = arch.token_embedding;
  m.params = init_params(arch, m.vocab, none, rng.index(0, 1u << 30), true);
  for (auto& t : named_tensors(m.params)) {
    for (double& v : t.data) v = rng.uniform(-0.8, 0.8);
  }
  crf::mask_unused_transitions(m.params.transitions);

  const std::size_t len = rng.index(1, max_len);
  for (std::size_t t = 0; t < len; ++t) {
    m.sentence.words.push_back(static_cast<int>(rng.index(1, m.vocab.token_count() - 1)));
    std::vector<int> chars;
    const std::size_t clen = rng.index(1, 3);
    for (std::size_t c = 0; c < clen; ++c) {
      chars.push_back(static_cast<int>(rng.index(1, m.vocab.char_count() - 1)));
    }
    m.sentence.chars.push_back(chars);
    m.sentence.labels.push_back(static_cast<int>(rng.index(0, num_labels - 1)));
  }
  return m;
}

namespace {

double inference_loss(const ModelParams& params, const EncodedSentence& sentence) {
  return sentence_loss(params, emissions(params, sentence), sentence.labels).value;
}

double sparse_component(const SparseRows& rows, std::size_t cols, std::size_t index) {
  auto it = rows.find(static_cast<int>(index / cols));
  return it == rows.end() ? 0.0 : it->second[index % cols];
}

}  // namespace

GradientCheck check_gradients(ModelParams params, const EncodedSentence& sentence, double h) {
  std::mt19937_64 unused(0);
  const ForwardResult fwd = forward(params, sentence, 0.0, false, unused);
  const LossResult loss = sentence_loss(params, fwd.emissions, sentence.labels);
  const Gradients grads = backward(params, fwd.cache, loss);
  const auto dense = dense_tensors(grads);

  GradientCheck result;
  for (auto& tensor : named_tensors(params)) {
    const ConstTensorRef* dense_grad = nullptr;
    for (const auto& g : dense) {
      if (g.name == tensor.name) dense_grad = &g;
    }
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
      double analytic = 0.0;
      if (tensor.name == "char_embeddings") {
        analytic = sparse_component(grads.char_embeddings, tensor.cols, i);
      } else if (tensor.name == "token_embeddings") {
        analytic = sparse_component(grads.token_embeddings, tensor.cols, i);
      } else {
        analytic = dense_grad->data[i];
      }
      const double saved = tensor.data[i];
      tensor.data[i] = saved + h;
      const double up = inference_loss(params, sentence);
      tensor.data[i] = saved - h;
      const double down = inference_loss(params, sentence);
      tensor.data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.components;
      if (rel > result.worst_relative_error) {
        result.worst_relative_error = rel;
        result.worst_tensor = tensor.name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

namespace {

const std::vector<std::string>& fuzz_alphabet() {
  static const std::vector<std::string> pool = {
      "a", "b", "c", "d", "e", "k", "x", "A", "B", "Q", "Z", "0", "7", "9", ".", ",", ";", "-",
      "(", ")", "'", "\"", "!", "?", "/", " ", " ", " ", "é", "ü", "ß", "ñ",
      "Ω", "€", "日", "本", "\U0001F600", "Ж"};
  return pool;
}

std::vector<std::string> split_codepoints(const std::string& line) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < line.size();) {
    const auto c = static_cast<unsigned char>(line[i]);
    const std::size_t n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    out.push_back(line.substr(i, n));
    i += n;
  }
  return out;
}

}  // namespace

FuzzedBrat fuzz_brat_document(Rng& rng) {
  static const std::vector<std::string> categories = {"PER", "LOC", "ORG", "Misc_Entity"};
  const auto& alphabet = fuzz_alphabet();

  struct Pending {
    std::size_t start, end;
    std::string category, surface;
  };
  std::vector<Pending> spans;
  FuzzedBrat out;
  std::size_t offset = 0;  // scalar values
  const std::size_t lines = rng.index(1, 5);
  for (std::size_t l = 0; l < lines; ++l) {
    std::vector<std::string> cps;
    const std::size_t len = rng.index(0, 40);
    for (std::size_t i = 0; i < len; ++i) cps.push_back(alphabet[rng.index(0, alphabet.size() - 1)]);
    std::size_t pos = 0;
    while (pos < len) {
      pos += rng.index(0, 8);
      if (pos >= len) break;
      const std::size_t end = std::min(len, pos + rng.index(1, 10));
      if (rng.coin(0.7)) {
        std::string surface;
        for (std::size_t i = pos; i < end; ++i) surface += cps[i];
        spans.push_back({offset + pos, offset + end, categories[rng.index(0, categories.size() - 1)],
                         surface});
      }
      pos = end;
    }
    for (const auto& cp : cps) out.text += cp;
    offset += len;
    if (l + 1 < lines || rng.coin()) {
      out.text += "\n";
      ++offset;
    }
  }
  // Ids are a random permutation so that file order differs from offset order.
  std::vector<std::size_t> ids(spans.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
  std::shuffle(ids.begin(), ids.end(), rng.engine());
  std::vector<std::size_t> by_id(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) by_id[ids[i] - 1] = i;
  for (std::size_t k = 0; k < by_id.size(); ++k) {
    const Pending& s = spans[by_id[k]];
    out.ann += "T" + std::to_string(k + 1) + "\t" + s.category + " " + std::to_string(s.start) + " " +
               std::to_string(s.end) + "\t" + s.surface + "\n";
  }
  out.span_count = spans.size();
  return out;
}

Document random_aligned_document(Rng& rng, const std::string& id) {
  static const std::vector<std::string> words = {
      "the", "river", "Anna", "Berlin", "quietly", "42", "met", "Zurich", "K9", "over",
      ",", ".", "(", ")", "café", "École", "data", "Mount", "x", "and"};
  static const std::vector<std::string> categories = {"PER", "LOC", "ORG"};
  Document doc;
  doc.id = id;
  std::size_t offset = 0;
  const std::size_t sentences = rng.index(1, 4);
  std::size_t next_id = 1;
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t n = rng.index(1, 8);
    std::vector<std::pair<std::size_t, std::size_t>> token_offsets;
    std::vector<std::string> toks;
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) {
        doc.text += " ";
        ++offset;
      }
      const std::string& w = words[rng.index(0, words.size() - 1)];
      const std::size_t len = split_codepoints(w).size();
      token_offsets.emplace_back(offset, offset + len);
      toks.push_back(w);
      doc.text += w;
      offset += len;
    }
    std::size_t t = 0;
    while (t < n) {
      t += rng.index(0, 3);
      if (t >= n) break;
      const std::size_t end = std::min(n, t + rng.index(1, 3));
      std::string surface;
      for (std::size_t i = t; i < end; ++i) surface += (i > t ? " " : "") + toks[i];
      doc.spans.push_back({"T" + std::to_string(next_id++),
                           categories[rng.index(0, categories.size() - 1)], token_offsets[t].first,
                           token_offsets[end - 1].second, surface});
      t = end;
    }
    if (s + 1 < sentences) {
      doc.text += "\n";
      ++offset;
    }
  }
  return doc;
}

fs::path toy_corpus_dir() { return fs::path(SEQFORGE_SOURCE_DIR) / "data" / "toy"; }
fs::path toy_config_path() { return toy_corpus_dir() / "toy.ini"; }
fs::path cli_path() { return fs::path(SEQFORGE_CLI_PATH); }

ScratchDir::ScratchDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("seqforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Config toy_config_in(const fs::path& dir) {
  const fs::path copy = dir / "toy";
  fs::create_directories(copy);
  for (const char* split : {"train", "valid", "test", "deploy"}) {
    fs::copy(toy_corpus_dir() / split, copy / split, fs::copy_options::recursive);
  }
  fs::copy_file(toy_config_path(), copy / "toy.ini");
  Config config = load_config(copy / "toy.ini");
  config.output_folder = dir / "output";
  return config;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ScoringCase> hand_counted_scoring_cases() {
  // Tokens: John 0-4, Smith 5-10, lives 11-16, in 17-19, Boston 20-26, . 27-28
  const std::string boston = "John Smith lives in Boston .";
  // Tokens: Acme 0-4, hired 5-10, Wei 11-14, Chen 15-19
  const std::string acme = "Acme hired Wei Chen";
  auto doc = [](const std::string& id, const std::string& text,
                std::vector<std::tuple<const char*, std::size_t, std::size_t>> spans) {
    Document d{id, text, {}, {}};
    int n = 0;
    for (const auto& [cat, start, end] : spans) {
      d.spans.push_back({"T" + std::to_string(++n), cat, start, end, text.substr(start, end - start)});
    }
    return d;
  };
  auto one = [&](std::vector<std::tuple<const char*, std::size_t, std::size_t>> gold,
                 std::vector<std::tuple<const char*, std::size_t, std::size_t>> pred) {
    return std::pair{std::vector<Document>{doc("b", boston, std::move(gold))},
                     std::vector<Document>{doc("b", boston, std::move(pred))}};
  };
  std::vector<ScoringCase> cases;
  auto add = [&](std::string name, std::pair<std::vector<Document>, std::vector<Document>> docs,
                 std::size_t tp, std::size_t fp, std::size_t fn, double p, double r, double f) {
    cases.push_back({std::move(name), std::move(docs.first), std::move(docs.second), tp, fp, fn, p,
                     r, f});
  };
  add("one_tp_one_fp_one_fn", one({{"PER", 0, 10}, {"LOC", 20, 26}}, {{"PER", 0, 10}, {"LOC", 11, 16}}),
      1, 1, 1, 50.0, 50.0, 50.0);
  add("identical", one({{"PER", 0, 10}, {"LOC", 20, 26}}, {{"PER", 0, 10}, {"LOC", 20, 26}}), 2, 0, 0,
      100.0, 100.0, 100.0);
  add("nothing_predicted", one({{"PER", 0, 10}, {"LOC", 20, 26}}, {}), 0, 0, 2, 0.0, 0.0, 0.0);
  add("nothing_gold", one({}, {{"PER", 0, 4}}), 0, 1, 0, 0.0, 0.0, 0.0);
  add("both_empty", one({}, {}), 0, 0, 0, 0.0, 0.0, 0.0);
  add("boundary_mismatch", one({{"PER", 0, 10}}, {{"PER", 0, 4}}), 0, 1, 1, 0.0, 0.0, 0.0);
  add("category_mismatch", one({{"PER", 0, 10}}, {{"ORG", 0, 10}}), 0, 1, 1, 0.0, 0.0, 0.0);
  // P = 2/2, R = 2/3, F1 = 2 * 1 * (2/3) / (5/3) = 4/5
  add("one_missed", one({{"PER", 0, 4}, {"PER", 5, 10}, {"LOC", 20, 26}}, {{"PER", 0, 4}, {"PER", 5, 10}}),
      2, 0, 1, 100.0, 200.0 / 3.0, 80.0);
  // P = 1/3, R = 1/1, F1 = 2 * (1/3) / (4/3) = 1/2
  add("two_spurious", one({{"PER", 0, 10}}, {{"PER", 0, 10}, {"LOC", 20, 26}, {"ORG", 11, 16}}), 1, 2, 0,
      100.0 / 3.0, 100.0, 50.0);
  // Micro-averaged over two documents: 3 TP, 1 FP, 1 FN.
  add("two_documents",
      {{doc("b", boston, {{"PER", 0, 10}, {"LOC", 20, 26}}), doc("a", acme, {{"ORG", 0, 4}, {"PER", 11, 19}})},
       {doc("a", acme, {{"ORG", 0, 4}, {"PER", 11, 14}}), doc("b", boston, {{"PER", 0, 10}, {"LOC", 20, 26}})}},
      3, 1, 1, 75.0, 75.0, 75.0);
  return cases;
}

}  // namespace seqforge::testing
