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

// Serial vs OpenMP throughput for batched decoding and entity counting.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "seqforge/batch.hpp"
#include "seqforge/evaluator.hpp"
#include "seqforge/model.hpp"

namespace {

using namespace seqforge;

struct BatchFixture {
  ModelParams params;
  std::vector<EncodedSentence> sentences;
};

const BatchFixture& batch_fixture() {
  static const BatchFixture fixture = [] {
    std::mt19937_64 rng(5);
    std::vector<std::string> tokens{"<PAD>", "<UNK>"}, chars{"<PAD>", "<UNK>"};
    for (int i = 0; i < 500; ++i) tokens.push_back("w" + std::to_string(i));
    for (char c = 'a'; c <= 'z'; ++c) chars.push_back(std::string(1, c));
    const std::vector<std::string> labels{"O",     "B-PER", "I-PER", "B-LOC", "I-LOC",
                                          "B-ORG", "I-ORG", "B-MISC", "I-MISC"};
    const Vocabulary vocab(tokens, chars, labels);

    Architecture arch;
    arch.char_vocab = vocab.char_count();
    arch.char_embedding = 25;
    arch.char_hidden = 25;
    arch.token_vocab = vocab.token_count();
    arch.token_embedding = 50;
    arch.token_hidden = 50;
    arch.num_labels = labels.size();
    EmbeddingTable none;
    none.dimension = arch.token_embedding;

    BatchFixture f;
    f.params = init_params(arch, vocab, none, 11, true);
    std::uniform_int_distribution<int> word(1, static_cast<int>(tokens.size()) - 1);
    std::uniform_int_distribution<int> ch(2, static_cast<int>(chars.size()) - 1);
    std::uniform_int_distribution<int> label(0, static_cast<int>(labels.size()) - 1);
    std::uniform_int_distribution<int> length(5, 30), word_length(2, 9);
    for (int s = 0; s < 256; ++s) {
      EncodedSentence sentence;
      for (int t = 0, n = length(rng); t < n; ++t) {
        sentence.words.push_back(word(rng));
        std::vector<int> w;
        for (int c = 0, m = word_length(rng); c < m; ++c) w.push_back(ch(rng));
        sentence.chars.push_back(w);
        sentence.labels.push_back(label(rng));
      }
      f.sentences.push_back(std::move(sentence));
    }
    return f;
  }();
  return fixture;
}

void BM_RunBatchSerial(benchmark::State& state) {
  const auto& f = batch_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::run_batch(f.params, f.sentences, true));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}
BENCHMARK(BM_RunBatchSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_RunBatchParallel(benchmark::State& state) {
  const auto& f = batch_fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel::run_batch(f.params, f.sentences, true, threads));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}
BENCHMARK(BM_RunBatchParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

struct CountFixture {
  std::vector<Document> gold, predicted;
};

const CountFixture& count_fixture() {
  static const CountFixture fixture = [] {
    std::mt19937_64 rng(6);
    std::bernoulli_distribution keep(0.8), relabel(0.1);
    CountFixture f;
    for (int d = 0; d < 2000; ++d) {
      Document doc;
      doc.id = "d" + std::to_string(d);
      for (int e = 0; e < 40; ++e) {
        const std::size_t start = doc.text.size();
        doc.text += "Name" + std::to_string(e) + " said so . ";
        doc.spans.push_back({"T" + std::to_string(e + 1), e % 3 == 0 ? "PER" : "LOC", start,
                             start + 4 + std::to_string(e).size(), ""});
        doc.spans.back().surface = doc.text.substr(start, doc.spans.back().end - start);
      }
      Document pred = doc;
      pred.spans.clear();
      for (auto s : doc.spans) {
        if (!keep(rng)) continue;
        if (relabel(rng)) s.category = "ORG";
        pred.spans.push_back(s);
      }
      f.gold.push_back(std::move(doc));
      f.predicted.push_back(std::move(pred));
    }
    return f;
  }();
  return fixture;
}

void BM_CountEntitiesSerial(benchmark::State& state) {
  const auto& f = count_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(serial::count_entities(f.gold, f.predicted));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.gold.size()));
}
BENCHMARK(BM_CountEntitiesSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CountEntitiesParallel(benchmark::State& state) {
  const auto& f = count_fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel::count_entities(f.gold, f.predicted, threads));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.gold.size()));
}
BENCHMARK(BM_CountEntitiesParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
