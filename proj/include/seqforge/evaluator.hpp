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
#include <vector>

#include "seqforge/corpus.hpp"

namespace seqforge {

struct CategoryScore {
  std::string category;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // gold entities
  double precision = 0.0;   // percent
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const CategoryScore&) const = default;
};

// Token-level counts; rows are gold labels, columns predicted labels.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;  // percent, micro-averaged
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<CategoryScore> categories;  // sorted by name
  ConfusionMatrix confusion;

  bool operator==(const EvalReport&) const = default;
};

// Per-category exact-match counts. Serial reference and an OpenMP version
// that counts documents in parallel and merges in document order.
struct EntityCounts {
  std::map<std::string, std::size_t> tp, fp, fn;

  bool operator==(const EntityCounts&) const = default;
};

namespace serial {
EntityCounts count_entities(std::span<const Document> gold, std::span<const Document> predicted);
}
namespace parallel {
EntityCounts count_entities(std::span<const Document> gold, std::span<const Document> predicted,
                            int threads);
}

// Percent with 0/0 defined as 0.
double percent(std::size_t numerator, std::size_t denominator);
double f1_score(double precision, double recall);

// Exact (category, start, end) matching, micro-averaged. Documents are
// paired by id and must share the same text; throws DocumentMismatch.
// The confusion matrix is built over gold-document tokens.
EvalReport evaluate_entities(std::span<const Document> gold, std::span<const Document> predicted,
                             int threads = 1);

// Labels are the union of both sequences, "O" first then sorted.
ConfusionMatrix confusion_matrix(std::span<const std::string> gold,
                                 std::span<const std::string> predicted);

// "50.0"
std::string format_percent(double value);
// Human-readable classification report.
std::string format_report(const EvalReport& report);

struct SplitMetrics {
  SplitName split = SplitName::kTrain;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double loss = 0.0;  // mean per sentence

  bool operator==(const SplitMetrics&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  std::vector<SplitMetrics> splits;
  double train_loss = 0.0;
  double seconds = 0.0;

  const SplitMetrics* find(SplitName split) const;
  bool operator==(const EpochRecord&) const = default;
};

// metrics.csv: epoch,split,precision,recall,f1,loss,seconds
std::string metrics_csv_header();
std::string metrics_csv_rows(const EpochRecord& record);
std::vector<EpochRecord> parse_metrics_csv(std::string_view content);

// Writes `path` (JSON) and, next to it, <stem>.f1_series.csv holding one row
// per epoch of `history`.
void write_report(const EvalReport& report, std::span<const EpochRecord> history,
                  const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);
std::filesystem::path f1_series_path(const std::filesystem::path& report_path);

}  // namespace seqforge
