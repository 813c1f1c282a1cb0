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

#include "seqforge/batch.hpp"

#include <algorithm>
#include <exception>

namespace seqforge {
namespace {

SentenceOutput run_one(const ModelParams& params, const EncodedSentence& sentence,
                       bool with_loss) {
  SentenceOutput out;
  if (sentence.words.empty()) return out;
  const Matrix scores = emissions(params, sentence);
  out.labels = decode(params, scores);
  if (with_loss && sentence.labels.size() == sentence.words.size()) {
    out.loss = sentence_loss(params, scores, sentence.labels).value;
  }
  return out;
}

}  // namespace

namespace serial {

std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss) {
  std::vector<SentenceOutput> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(run_one(params, s, with_loss));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss, int threads) {
  std::vector<SentenceOutput> out(sentences.size());
  std::exception_ptr failure;
  const auto n = static_cast<long long>(sentences.size());
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic, 4)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          run_one(params, sentences[static_cast<std::size_t>(i)], with_loss);
    } catch (...) {
#pragma omp critical(seqforge_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace parallel

std::vector<SentenceOutput> run_batch(const ModelParams& params,
                                      std::span<const EncodedSentence> sentences,
                                      bool with_loss, int threads) {
  if (threads <= 1) return serial::run_batch(params, sentences, with_loss);
  return parallel::run_batch(params, sentences, with_loss, threads);
}

}  // namespace seqforge
