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

#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "seqforge/error.hpp"
#include "seqforge/evaluator.hpp"
#include "seqforge/format_io.hpp"
#include "support.hpp"

namespace seqforge {
namespace {

using Labels = std::vector<std::string>;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kUsageError;
}

TEST(EvaluateEntities, HandCountedCases) {
  const auto cases = testing::hand_counted_scoring_cases();
  ASSERT_EQ(cases.size(), 10u);
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    const EvalReport r = evaluate_entities(c.gold, c.predicted);
    EXPECT_EQ(r.tp, c.tp);
    EXPECT_EQ(r.fp, c.fp);
    EXPECT_EQ(r.fn, c.fn);
    EXPECT_NEAR(r.precision, c.precision, 1e-9);
    EXPECT_NEAR(r.recall, c.recall, 1e-9);
    EXPECT_NEAR(r.f1, c.f1, 1e-9);
  }
}

TEST(EvaluateEntities, PerCategoryBreakdown) {
  const auto cases = testing::hand_counted_scoring_cases();
  const auto& c = cases.back();
  const EvalReport r = evaluate_entities(c.gold, c.predicted);
  ASSERT_EQ(r.categories.size(), 3u);
  EXPECT_EQ(r.categories[0].category, "LOC");
  EXPECT_EQ(r.categories[1].category, "ORG");
  const CategoryScore& per = r.categories[2];
  EXPECT_EQ(per.category, "PER");
  EXPECT_EQ(per.tp, 1u);
  EXPECT_EQ(per.fp, 1u);
  EXPECT_EQ(per.fn, 1u);
  EXPECT_EQ(per.support, 2u);
  EXPECT_NEAR(per.f1, 50.0, 1e-12);
  EXPECT_EQ(format_percent(per.f1), "50.0");
  EXPECT_NE(format_report(r).find("PER"), std::string::npos);
}

TEST(EvaluateEntities, MismatchedDocuments) {
  const Document a{"a", "x y", {}, {}};
  const Document b{"b", "x y", {}, {}};
  const Document a2{"a", "x z", {}, {}};
  EXPECT_EQ(code_of([&] { evaluate_entities(std::vector{a}, std::vector{b}); }),
            ErrorCode::kDocumentMismatch);
  EXPECT_EQ(code_of([&] { evaluate_entities(std::vector{a}, std::vector{a2}); }),
            ErrorCode::kDocumentMismatch);
  EXPECT_EQ(code_of([&] { evaluate_entities(std::vector{a}, std::vector<Document>{}); }),
            ErrorCode::kDocumentMismatch);
}

TEST(ConfusionMatrix, Examples) {
  const ConfusionMatrix m = confusion_matrix(Labels{"O", "B-PER"}, Labels{"B-PER", "B-PER"});
  EXPECT_EQ(m.labels, (Labels{"O", "B-PER"}));
  EXPECT_EQ(m.counts, (std::vector<std::vector<std::size_t>>{{0, 1}, {0, 1}}));
  const Labels same = {"O", "B-LOC", "I-LOC", "O"};
  const ConfusionMatrix d = confusion_matrix(same, same);
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    for (std::size_t j = 0; j < d.labels.size(); ++j) {
      if (i != j) EXPECT_EQ(d.counts[i][j], 0u);
    }
  }
  EXPECT_EQ(d.counts[0][0], 2u);
  const ConfusionMatrix e = confusion_matrix(Labels{}, Labels{});
  for (const auto& row : e.counts) {
    for (auto v : row) EXPECT_EQ(v, 0u);
  }
}

std::vector<Document> perturb(testing::Rng& rng, const std::vector<Document>& gold) {
  std::vector<Document> pred = gold;
  for (auto& d : pred) {
    std::vector<EntitySpan> kept;
    for (const auto& s : d.spans) {
      if (rng.coin(0.3)) continue;
      EntitySpan t = s;
      if (rng.coin(0.2)) t.category = t.category == "PER" ? "LOC" : "PER";
      kept.push_back(t);
    }
    d.spans = kept;
    d.sentences.clear();
  }
  return pred;
}

TEST(EvaluatorProperty, InvariantsOnRandomCorpora) {
  testing::Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Document> gold;
    const std::size_t n = rng.index(1, 5);
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(testing::random_aligned_document(rng, "d" + std::to_string(i)));
    }
    const auto pred = perturb(rng, gold);
    const EvalReport r = evaluate_entities(gold, pred);
    // Counts reconcile with the span totals.
    std::size_t gold_total = 0, pred_total = 0, tokens = 0;
    for (const auto& d : gold) {
      gold_total += d.spans.size();
      tokens += tokenize(d.text).size();
    }
    for (const auto& d : pred) pred_total += d.spans.size();
    ASSERT_EQ(r.tp + r.fn, gold_total);
    ASSERT_EQ(r.tp + r.fp, pred_total);
    const double expected_f1 =
        r.precision + r.recall == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
    ASSERT_NEAR(r.f1, expected_f1, 1e-9);
    ASSERT_GE(r.f1, 0.0);
    ASSERT_LE(r.f1, 100.0);
    // Confusion rows sum to gold token counts.
    std::size_t cells = 0;
    for (const auto& row : r.confusion.counts) {
      for (auto v : row) cells += v;
    }
    ASSERT_EQ(cells, tokens);
    // Self-evaluation is perfect unless there is nothing to find.
    const EvalReport self = evaluate_entities(gold, gold);
    ASSERT_EQ(self.f1, gold_total == 0 ? 0.0 : 100.0);
    // The parallel counter agrees with the serial one.
    ASSERT_EQ(parallel::count_entities(gold, pred, 4), serial::count_entities(gold, pred));
    ASSERT_EQ(evaluate_entities(gold, pred, 4), r);
  }
}

TEST(Report, RoundTripAndF1Series) {
  const auto cases = testing::hand_counted_scoring_cases();
  const EvalReport r = evaluate_entities(cases.back().gold, cases.back().predicted);
  std::vector<EpochRecord> history;
  for (int e = 1; e <= 3; ++e) {
    history.push_back({e,
                       {{SplitName::kTrain, 50.0, 50.0, 50.0 + e, 1.0 / e},
                        {SplitName::kValid, 40.0, 40.0, 40.0 + e, 2.0 / e}},
                       1.0 / e,
                       0.0});
  }
  testing::ScratchDir dir("report");
  write_report(r, history, dir / "report_valid.json");
  EXPECT_EQ(read_report(dir / "report_valid.json"), r);
  std::istringstream series(testing::slurp(f1_series_path(dir / "report_valid.json")));
  std::vector<std::string> lines;
  for (std::string line; std::getline(series, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "epoch,train_f1,valid_f1,test_f1");
  EXPECT_EQ(lines[3].substr(0, 2), "3,");
}

TEST(MetricsCsv, RowsParseBack) {
  const EpochRecord rec{4,
                        {{SplitName::kTrain, 100.0, 100.0, 100.0, 0.25},
                         {SplitName::kValid, 95.5, 90.0, 92.6667, 1.5}},
                        0.25,
                        1.5};
  const std::string csv = metrics_csv_header() + metrics_csv_rows(rec);
  const auto parsed = parse_metrics_csv(csv);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].epoch, 4);
  ASSERT_EQ(parsed[0].splits.size(), 2u);
  EXPECT_EQ(parsed[0].splits[1].recall, 90.0);
  EXPECT_EQ(metrics_csv_header() + metrics_csv_rows(parsed[0]), csv);
}

TEST(Percent, ZeroOverZeroIsZero) {
  EXPECT_EQ(percent(0, 0), 0.0);
  EXPECT_EQ(percent(1, 4), 25.0);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
  EXPECT_NEAR(f1_score(100.0, 50.0), 200.0 / 3.0, 1e-12);
}

}  // namespace
}  // namespace seqforge
