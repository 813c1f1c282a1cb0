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

#include <optional>
#include <span>
#include <vector>

#include "seqforge/model.hpp"

// Sentence-parallel inference. The serial versions are the reference the
// OpenMP versions are tested against; both produce identical results
// because every sentence is scored independently with read-only params.
namespace seqforge {

struct SentenceOutput {
  std::vector<int> labels;
  std::optional<double> loss;  // set when gold labels were available
};

namespace serial {
std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss);
}

namespace parallel {
std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss, int threads);
}

// Dispatches to the serial path when threads <= 1.
std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss, int threads);

}  // namespace seqforge
