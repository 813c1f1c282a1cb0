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

#include "seqforge/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"

#ifdef _OPENMP
#endif

namespace seqforge {
namespace {

using Key = std::tuple<std::string, std::size_t, std::size_t>;

// Index of predicted documents by id, validated against the gold list.
std::vector<const Document*> pair_documents(std::span<const Document> gold,
                                            std::span<const Document> predicted) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : predicted) {
    if (!by_id.emplace(d.id, &d).second) {
      throw Error(ErrorCode::kDocumentMismatch, "predicted document id '" + d.id + "' repeated");
    }
  }
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kDocumentMismatch,
                std::to_string(gold.size()) + " gold documents but " +
                    std::to_string(predicted.size()) + " predicted documents");
  }
  std::vector<const Document*> out;
  for (const auto& g : gold) {
    auto it = by_id.find(g.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kDocumentMismatch, "no predicted document for id '" + g.id + "'");
    }
    if (it->second->text != g.text) {
      throw Error(ErrorCode::kDocumentMismatch, "document '" + g.id + "' text differs");
    }
    out.push_back(it->second);
  }
  return out;
}

void count_document(const Document& gold, const Document& predicted, EntityCounts& counts) {
  std::set<Key> g;
  std::set<Key> p;
  for (const auto& s : gold.spans) g.emplace(s.category, s.start, s.end);
  for (const auto& s : predicted.spans) p.emplace(s.category, s.start, s.end);
  // Every category seen on either side gets a row, even with zero counts.
  auto touch = [&](const std::string& cat) {
    counts.tp.try_emplace(cat, 0);
    counts.fp.try_emplace(cat, 0);
    counts.fn.try_emplace(cat, 0);
  };
  for (const auto& k : g) {
    const auto& cat = std::get<0>(k);
    touch(cat);
    ++(p.count(k) != 0 ? counts.tp[cat] : counts.fn[cat]);
  }
  for (const auto& k : p) {
    const auto& cat = std::get<0>(k);
    touch(cat);
    if (g.count(k) == 0) ++counts.fp[cat];
  }
}

void merge(EntityCounts& into, const EntityCounts& from) {
  for (const auto& [k, v] : from.tp) into.tp[k] += v;
  for (const auto& [k, v] : from.fp) into.fp[k] += v;
  for (const auto& [k, v] : from.fn) into.fn[k] += v;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::vector<Token> document_tokens(const Document& doc) {
  Document copy;
  if (doc.sentences.empty()) {
    copy.id = doc.id;
    copy.text = doc.text;
    annotate_sentences(copy, SpanAlignment::kSnapOutward);
  }
  const auto& source = doc.sentences.empty() ? copy.sentences : doc.sentences;
  std::vector<Token> tokens;
  for (const auto& s : source) tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
  return tokens;
}

}  // namespace

namespace serial {

EntityCounts count_entities(std::span<const Document> gold, std::span<const Document> predicted) {
  const auto paired = pair_documents(gold, predicted);
  EntityCounts counts;
  for (std::size_t i = 0; i < gold.size(); ++i) count_document(gold[i], *paired[i], counts);
  return counts;
}

}  // namespace serial

namespace parallel {

EntityCounts count_entities(std::span<const Document> gold, std::span<const Document> predicted,
                            int threads) {
  const auto paired = pair_documents(gold, predicted);
  std::vector<EntityCounts> per_doc(gold.size());
  const auto n = static_cast<long long>(gold.size());
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    count_document(gold[static_cast<std::size_t>(i)], *paired[static_cast<std::size_t>(i)],
                   per_doc[static_cast<std::size_t>(i)]);
  }
  EntityCounts counts;
  for (const auto& c : per_doc) merge(counts, c);
  return counts;
}

}  // namespace parallel

double percent(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return 0.0;
  return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

EvalReport evaluate_entities(std::span<const Document> gold, std::span<const Document> predicted,
                             int threads) {
  const EntityCounts counts = threads > 1 ? parallel::count_entities(gold, predicted, threads)
                                          : serial::count_entities(gold, predicted);
  EvalReport report;
  for (const auto& [cat, tp] : counts.tp) {
    CategoryScore s;
    s.category = cat;
    s.tp = tp;
    s.fp = counts.fp.at(cat);
    s.fn = counts.fn.at(cat);
    s.support = s.tp + s.fn;
    s.precision = percent(s.tp, s.tp + s.fp);
    s.recall = percent(s.tp, s.tp + s.fn);
    s.f1 = f1_score(s.precision, s.recall);
    report.tp += s.tp;
    report.fp += s.fp;
    report.fn += s.fn;
    report.categories.push_back(std::move(s));
  }
  report.precision = percent(report.tp, report.tp + report.fp);
  report.recall = percent(report.tp, report.tp + report.fn);
  report.f1 = f1_score(report.precision, report.recall);

  const auto paired = pair_documents(gold, predicted);
  std::vector<std::string> gold_labels;
  std::vector<std::string> pred_labels;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::vector<Token> tokens = document_tokens(gold[i]);
    auto g = spans_to_labels(tokens, gold[i].spans, SpanAlignment::kSnapOutward);
    auto p = spans_to_labels(tokens, paired[i]->spans, SpanAlignment::kSnapOutward);
    gold_labels.insert(gold_labels.end(), g.begin(), g.end());
    pred_labels.insert(pred_labels.end(), p.begin(), p.end());
  }
  report.confusion = confusion_matrix(gold_labels, pred_labels);
  return report;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> gold,
                                 std::span<const std::string> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confusion_matrix: sequences differ in length");
  }
  std::set<std::string> names(gold.begin(), gold.end());
  names.insert(predicted.begin(), predicted.end());
  ConfusionMatrix m;
  if (names.erase(std::string(kOutsideLabel)) != 0) m.labels.emplace_back(kOutsideLabel);
  m.labels.insert(m.labels.end(), names.begin(), names.end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.labels.size(); ++i) index.emplace(m.labels[i], i);
  m.counts.assign(m.labels.size(), std::vector<std::size_t>(m.labels.size(), 0));
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.counts[index[gold[i]]][index[predicted[i]]];
  return m;
}

std::string format_percent(double value) { return pct(value); }

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %9s %9s %9s %8s %6s %6s %6s\n", "category", "precision",
                "recall", "f1", "support", "tp", "fp", "fn");
  out << line;
  for (const auto& c : r.categories) {
    std::snprintf(line, sizeof(line), "%-16s %9s %9s %9s %8zu %6zu %6zu %6zu\n", c.category.c_str(),
                  pct(c.precision).c_str(), pct(c.recall).c_str(), pct(c.f1).c_str(), c.support,
                  c.tp, c.fp, c.fn);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-16s %9s %9s %9s %8zu %6zu %6zu %6zu\n", "micro",
                pct(r.precision).c_str(), pct(r.recall).c_str(), pct(r.f1).c_str(), r.tp + r.fn,
                r.tp, r.fp, r.fn);
  out << line;
  return out.str();
}

const SplitMetrics* EpochRecord::find(SplitName split) const {
  for (const auto& s : splits) {
    if (s.split == split) return &s;
  }
  return nullptr;
}

std::string metrics_csv_header() { return "epoch,split,precision,recall,f1,loss,seconds\n"; }

std::string metrics_csv_rows(const EpochRecord& record) {
  std::string out;
  char line[256];
  for (const auto& s : record.splits) {
    std::snprintf(line, sizeof(line), "%d,%s,%.4f,%.4f,%.4f,%.6f,%.3f\n", record.epoch,
                  std::string(split_name(s.split)).c_str(), s.precision, s.recall, s.f1, s.loss,
                  record.seconds);
    out += line;
  }
  return out;
}

std::vector<EpochRecord> parse_metrics_csv(std::string_view content) {
  std::vector<EpochRecord> out;
  std::istringstream in{std::string(content)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const auto split = f.size() == 7 ? parse_split_name(f[1]) : std::nullopt;
    if (!split) throw Error(ErrorCode::kMalformedLine, "bad metrics.csv row: " + line);
    const int epoch = std::stoi(f[0]);
    if (out.empty() || out.back().epoch != epoch) {
      out.push_back({});
      out.back().epoch = epoch;
    }
    EpochRecord& rec = out.back();
    SplitMetrics m{*split, std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
    if (*split == SplitName::kTrain) rec.train_loss = m.loss;
    rec.seconds = std::stod(f[6]);
    rec.splits.push_back(m);
  }
  return out;
}

std::filesystem::path f1_series_path(const std::filesystem::path& report_path) {
  return report_path.parent_path() / (report_path.stem().string() + ".f1_series.csv");
}

void write_report(const EvalReport& r, std::span<const EpochRecord> history,
                  const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["micro"] = {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn}};
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : r.categories) {
    j["categories"].push_back({{"category", c.category},
                               {"precision", c.precision},
                               {"recall", c.recall},
                               {"f1", c.f1},
                               {"support", c.support},
                               {"tp", c.tp},
                               {"fp", c.fp},
                               {"fn", c.fn}});
  }
  j["confusion"] = {{"labels", r.confusion.labels}, {"counts", r.confusion.counts}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, j.dump(2) + "\n");

  std::string series = "epoch,train_f1,valid_f1,test_f1\n";
  char line[128];
  for (const auto& rec : history) {
    auto f1 = [&](SplitName s) {
      const SplitMetrics* m = rec.find(s);
      return m == nullptr ? std::string() : pct(m->f1);
    };
    std::snprintf(line, sizeof(line), "%d,%s,%s,%s\n", rec.epoch, f1(SplitName::kTrain).c_str(),
                  f1(SplitName::kValid).c_str(), f1(SplitName::kTest).c_str());
    series += line;
  }
  write_file_atomic(f1_series_path(path), series);
}

EvalReport read_report(const std::filesystem::path& path) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    const auto& m = j.at("micro");
    r.precision = m.at("precision").get<double>();
    r.recall = m.at("recall").get<double>();
    r.f1 = m.at("f1").get<double>();
    r.tp = m.at("tp").get<std::size_t>();
    r.fp = m.at("fp").get<std::size_t>();
    r.fn = m.at("fn").get<std::size_t>();
    for (const auto& c : j.at("categories")) {
      CategoryScore s;
      s.category = c.at("category").get<std::string>();
      s.precision = c.at("precision").get<double>();
      s.recall = c.at("recall").get<double>();
      s.f1 = c.at("f1").get<double>();
      s.support = c.at("support").get<std::size_t>();
      s.tp = c.at("tp").get<std::size_t>();
      s.fp = c.at("fp").get<std::size_t>();
      s.fn = c.at("fn").get<std::size_t>();
      r.categories.push_back(std::move(s));
    }
    r.confusion.labels = j.at("confusion").at("labels").get<std::vector<std::string>>();
    r.confusion.counts =
        j.at("confusion").at("counts").get<std::vector<std::vector<std::size_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedLine, "report " + path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace seqforge
