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

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "seqforge/config.hpp"
#include "seqforge/corpus.hpp"
#include "seqforge/embeddings.hpp"
#include "seqforge/evaluator.hpp"
#include "seqforge/model.hpp"

namespace seqforge {

enum class StopReason { kPatience, kMaxEpochs, kTimeBudget, kInterrupted };

std::string_view stop_reason_name(StopReason reason);

// Validation-driven stopping rule, evaluated once per finished epoch:
// a strict improvement of the validation F1 resets the patience counter;
// training stops once more than `patience` epochs passed without one, when
// the epoch cap is reached, or when the elapsed time exceeds the budget.
class EarlyStopping {
 public:
  EarlyStopping(int patience, int max_epochs, double max_hours);

  struct Decision {
    bool improved = false;
    std::optional<StopReason> stop;
  };

  Decision observe(int epoch, double valid_f1, double elapsed_hours);

  int best_epoch() const { return best_epoch_; }
  double best_f1() const { return best_f1_; }
  int epochs_without_improvement() const { return since_best_; }

 private:
  int patience_;
  int max_epochs_;
  double max_hours_;
  int best_epoch_ = 0;
  double best_f1_ = -1.0;
  int since_best_ = 0;
};

struct TrainOutcome {
  int best_epoch = 0;
  double best_valid_f1 = 0.0;
  StopReason stop_reason = StopReason::kMaxEpochs;
  std::filesystem::path run_dir;
  std::filesystem::path best_checkpoint;
  std::vector<EpochRecord> history;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Polled between sentences; a set flag ends training with kInterrupted.
  const std::atomic<bool>* stop_requested = nullptr;
};

// Trains on <dataset_folder>/train, stops on <dataset_folder>/valid and, when
// present, reports on test. Writes <output_folder>/<run_id>/{checkpoints/,
// metrics.csv, predictions/{valid,test,deploy}/, report_{valid,test}.json}.
// Throws EmptySplit and propagates I/O and format errors.
TrainOutcome train(const Config& config, const TrainHooks& hooks = {});

// Same loop over already loaded splits; `valid` must be non-empty.
TrainOutcome train(const Config& config, const DatasetSplit& train_split,
                   const DatasetSplit& valid_split, const DatasetSplit* test_split,
                   const DatasetSplit* deploy_split, const TrainHooks& hooks = {});

// Tags every document. Documents without sentences are annotated first;
// returned documents carry the predicted spans (ids T1.. per document).
std::vector<Document> predict(const ModelParams& params, const Vocabulary& vocab,
                              TaggingFormat format, std::span<const Document> documents,
                              int threads = 1);

}  // namespace seqforge
