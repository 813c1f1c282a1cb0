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

#include "seqforge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "seqforge/batch.hpp"
#include "seqforge/checkpoint.hpp"
#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"

namespace fs = std::filesystem;

namespace seqforge {

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kPatience: return "patience";
    case StopReason::kMaxEpochs: return "max_epochs";
    case StopReason::kTimeBudget: return "time_budget";
    case StopReason::kInterrupted: return "interrupted";
  }
  return "unknown";
}

EarlyStopping::EarlyStopping(int patience, int max_epochs, double max_hours)
    : patience_(patience), max_epochs_(max_epochs), max_hours_(max_hours) {}

EarlyStopping::Decision EarlyStopping::observe(int epoch, double valid_f1, double elapsed_hours) {
  Decision d;
  if (valid_f1 > best_f1_) {
    best_f1_ = valid_f1;
    best_epoch_ = epoch;
    since_best_ = 0;
    d.improved = true;
  } else {
    ++since_best_;
  }
  if (since_best_ > patience_) {
    d.stop = StopReason::kPatience;
  } else if (epoch >= max_epochs_) {
    d.stop = StopReason::kMaxEpochs;
  } else if (elapsed_hours > max_hours_) {
    d.stop = StopReason::kTimeBudget;
  }
  return d;
}

namespace {

struct EncodedSplit {
  std::vector<EncodedSentence> sentences;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (document, sentence)
};

EncodedSplit encode_documents(const Vocabulary& vocab, std::span<const Document> docs,
                              TaggingFormat format) {
  EncodedSplit out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t s = 0; s < docs[d].sentences.size(); ++s) {
      if (docs[d].sentences[s].tokens.empty()) continue;
      out.sentences.push_back(encode_sentence(vocab, docs[d].sentences[s], format));
      out.origin.emplace_back(d, s);
    }
  }
  return out;
}

std::vector<Document> assemble_predictions(const Vocabulary& vocab, std::span<const Document> docs,
                                           const EncodedSplit& encoded,
                                           std::span<const SentenceOutput> outputs) {
  std::vector<Document> out(docs.begin(), docs.end());
  std::vector<std::vector<std::vector<std::string>>> labels(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    labels[d].resize(docs[d].sentences.size());
    for (std::size_t s = 0; s < docs[d].sentences.size(); ++s) {
      labels[d][s].assign(docs[d].sentences[s].tokens.size(), std::string(kOutsideLabel));
    }
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto [d, s] = encoded.origin[i];
    for (std::size_t t = 0; t < outputs[i].labels.size(); ++t) {
      labels[d][s][t] = vocab.labels()[static_cast<std::size_t>(outputs[i].labels[t])];
    }
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    // Per-sentence repair keeps entities from running across sentences.
    std::vector<Token> tokens;
    std::vector<std::string> bio;
    for (std::size_t s = 0; s < docs[d].sentences.size(); ++s) {
      const auto& toks = docs[d].sentences[s].tokens;
      tokens.insert(tokens.end(), toks.begin(), toks.end());
      const auto fixed = to_bio(labels[d][s]);
      bio.insert(bio.end(), fixed.begin(), fixed.end());
    }
    out[d].spans = labels_to_spans(tokens, bio, docs[d].text);
    for (std::size_t s = 0; s < out[d].sentences.size(); ++s) {
      out[d].sentences[s].labels = to_bio(labels[d][s]);
    }
  }
  return out;
}

struct SplitEvaluation {
  SplitMetrics metrics;
  std::vector<Document> predictions;
  EvalReport report;
};

SplitEvaluation evaluate_split(const ModelParams& params, const Vocabulary& vocab,
                               const DatasetSplit& split, const EncodedSplit& encoded,
                               int threads) {
  const auto outputs = run_batch(params, encoded.sentences, true, threads);
  SplitEvaluation ev;
  ev.predictions = assemble_predictions(vocab, split.documents, encoded, outputs);
  ev.report = evaluate_entities(split.documents, ev.predictions, threads);
  double loss = 0.0;
  for (const auto& o : outputs) loss += o.loss.value_or(0.0);
  ev.metrics.split = split.name;
  ev.metrics.precision = ev.report.precision;
  ev.metrics.recall = ev.report.recall;
  ev.metrics.f1 = ev.report.f1;
  ev.metrics.loss = outputs.empty() ? 0.0 : loss / static_cast<double>(outputs.size());
  return ev;
}

std::string default_run_id() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "run-%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::size_t sentence_count(const DatasetSplit& split) {
  std::size_t n = 0;
  for (const auto& d : split.documents) {
    for (const auto& s : d.sentences) n += s.tokens.empty() ? 0 : 1;
  }
  return n;
}

void append_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
}

}  // namespace

std::vector<Document> predict(const ModelParams& params, const Vocabulary& vocab,
                              TaggingFormat format, std::span<const Document> documents,
                              int threads) {
  std::vector<Document> docs(documents.begin(), documents.end());
  for (auto& d : docs) {
    if (d.sentences.empty()) annotate_sentences(d, SpanAlignment::kSnapOutward);
    for (auto& s : d.sentences) s.labels.clear();
  }
  const EncodedSplit encoded = encode_documents(vocab, docs, format);
  const auto outputs = run_batch(params, encoded.sentences, false, threads);
  return assemble_predictions(vocab, docs, encoded, outputs);
}

TrainOutcome train(const Config& config, const TrainHooks& hooks) {
  validate_config(config);
  auto splits = load_dataset(config.dataset_folder);
  auto get = [&](SplitName s) -> const DatasetSplit* {
    auto it = splits.find(s);
    return it == splits.end() ? nullptr : &it->second;
  };
  const DatasetSplit* tr = get(SplitName::kTrain);
  const DatasetSplit* va = get(SplitName::kValid);
  if (tr == nullptr || sentence_count(*tr) == 0) {
    throw Error(ErrorCode::kEmptySplit,
                "no training sentences under " + (config.dataset_folder / "train").string());
  }
  if (va == nullptr || sentence_count(*va) == 0) {
    throw Error(ErrorCode::kEmptySplit,
                "no validation sentences under " + (config.dataset_folder / "valid").string());
  }
  return train(config, *tr, *va, get(SplitName::kTest), get(SplitName::kDeploy), hooks);
}

TrainOutcome train(const Config& config, const DatasetSplit& train_split,
                   const DatasetSplit& valid_split, const DatasetSplit* test_split,
                   const DatasetSplit* deploy_split, const TrainHooks& hooks) {
  validate_config(config);
  if (sentence_count(train_split) == 0) {
    throw Error(ErrorCode::kEmptySplit, "training split has no sentences");
  }
  if (sentence_count(valid_split) == 0) {
    throw Error(ErrorCode::kEmptySplit, "validation split has no sentences");
  }
  const auto started = std::chrono::steady_clock::now();
  auto elapsed_seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  EmbeddingTable table;
  table.dimension = static_cast<std::size_t>(config.token_embedding_dimension);
  if (!config.token_emb_pretrained_file.empty()) {
    EmbeddingLoadStats stats;
    table = load_embeddings(config.token_emb_pretrained_file, table.dimension, &stats);
    spdlog::info("loaded {} pretrained vectors ({} skipped)", stats.loaded, stats.skipped);
  }

  std::vector<const DatasetSplit*> others{&valid_split};
  if (test_split != nullptr) others.push_back(test_split);
  if (deploy_split != nullptr) others.push_back(deploy_split);
  const Vocabulary vocab =
      build_vocab(train_split, table, {config.tagging_format, config.vocab_only_embedded}, others);
  ModelParams params = init_params(make_architecture(config, vocab), vocab, table, config.seed,
                                   config.random_initial_transitions);
  table.entries.clear();

  const TaggingFormat fmt = config.tagging_format;
  const EncodedSplit enc_train = encode_documents(vocab, train_split.documents, fmt);
  const EncodedSplit enc_valid = encode_documents(vocab, valid_split.documents, fmt);
  const bool has_test = test_split != nullptr && sentence_count(*test_split) > 0;
  const EncodedSplit enc_test =
      has_test ? encode_documents(vocab, test_split->documents, fmt) : EncodedSplit{};

  TrainOutcome outcome;
  outcome.run_dir = config.output_folder / (config.run_id.empty() ? default_run_id() : config.run_id);
  fs::create_directories(outcome.run_dir / "checkpoints");
  outcome.best_checkpoint = outcome.run_dir / "checkpoints" / "best.ckpt";
  const fs::path metrics_path = outcome.run_dir / "metrics.csv";
  write_file_atomic(metrics_path, metrics_csv_header());

  std::mt19937_64 shuffle_rng(config.seed);
  std::mt19937_64 dropout_rng(config.seed + 1);
  std::vector<std::size_t> order(enc_train.sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Gradients grads = Gradients::zeros_like(params);
  EarlyStopping stopping(config.patience, config.maximum_number_of_epochs,
                         config.maximum_training_time);
  const int threads = config.number_of_cpu_threads;
  auto interrupted = [&] {
    return hooks.stop_requested != nullptr && hooks.stop_requested->load();
  };

  for (int epoch = 1;; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    bool aborted = false;
    for (std::size_t idx : order) {
      if (interrupted()) {
        aborted = true;
        break;
      }
      const EncodedSentence& sentence = enc_train.sentences[idx];
      ForwardResult fwd = forward(params, sentence, config.dropout, true, dropout_rng);
      const LossResult loss = sentence_loss(params, fwd.emissions, sentence.labels);
      loss_sum += loss.value;
      grads.clear();
      backward(params, fwd.cache, loss, grads);
      sgd_step(params, grads, config.learning_rate, config.gradient_clip);
    }
    if (aborted) {
      outcome.stop_reason = StopReason::kInterrupted;
      break;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, order.size()));
    SplitEvaluation ev_train = evaluate_split(params, vocab, train_split, enc_train, threads);
    ev_train.metrics.loss = record.train_loss;
    const SplitEvaluation ev_valid = evaluate_split(params, vocab, valid_split, enc_valid, threads);
    record.splits.push_back(ev_train.metrics);
    record.splits.push_back(ev_valid.metrics);
    if (has_test) {
      record.splits.push_back(evaluate_split(params, vocab, *test_split, enc_test, threads).metrics);
    }
    const double seconds = elapsed_seconds();
    record.seconds = config.log_elapsed_time ? seconds : 0.0;

    const auto decision = stopping.observe(epoch, ev_valid.metrics.f1, seconds / 3600.0);
    if (decision.improved) save_model(params, vocab, config, outcome.best_checkpoint);
    append_text(metrics_path, metrics_csv_rows(record));
    outcome.history.push_back(record);
    spdlog::debug("epoch {:3d}  loss {:.4f}  train F1 {:.1f}  valid F1 {:.1f}{}", epoch,
                 record.train_loss, ev_train.metrics.f1, ev_valid.metrics.f1,
                 decision.improved ? "  *" : "");
    if (hooks.on_epoch) hooks.on_epoch(record);
    if (decision.stop) {
      outcome.stop_reason = *decision.stop;
      break;
    }
  }

  outcome.best_epoch = stopping.best_epoch();
  outcome.best_valid_f1 = std::max(0.0, stopping.best_f1());
  if (outcome.stop_reason == StopReason::kInterrupted || !fs::exists(outcome.best_checkpoint)) {
    return outcome;
  }

  // Outputs come from the reloaded checkpoint so they match what a later
  // `predict` run would produce.
  const Checkpoint best = load_model(outcome.best_checkpoint);
  auto export_split = [&](const DatasetSplit& split, const EncodedSplit* encoded) {
    const fs::path dir = outcome.run_dir / "predictions" / std::string(split_name(split.name));
    fs::create_directories(dir);
    std::vector<Document> predicted;
    if (encoded != nullptr) {
      const SplitEvaluation ev = evaluate_split(best.params, best.vocab, split, *encoded, threads);
      predicted = ev.predictions;
      write_report(ev.report, outcome.history,
                   outcome.run_dir / ("report_" + std::string(split_name(split.name)) + ".json"));
    } else {
      predicted = predict(best.params, best.vocab, fmt, split.documents, threads);
    }
    for (const auto& doc : predicted) write_brat_document(dir, doc);
  };
  export_split(valid_split, &enc_valid);
  if (has_test) export_split(*test_split, &enc_test);
  if (deploy_split != nullptr) export_split(*deploy_split, nullptr);
  return outcome;
}

}  // namespace seqforge
