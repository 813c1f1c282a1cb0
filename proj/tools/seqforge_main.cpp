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

// seqforge command line: train | predict | evaluate | convert | serve.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "seqforge/checkpoint.hpp"
#include "seqforge/config.hpp"
#include "seqforge/error.hpp"
#include "seqforge/evaluator.hpp"
#include "seqforge/format_io.hpp"
#include "seqforge/server.hpp"
#include "seqforge/trainer.hpp"

namespace fs = std::filesystem;
using namespace seqforge;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("seqforge");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SEQFORGE_LOG"); env != nullptr && *env != '\0') {
    spdlog::cfg::helpers::load_levels(env);
  }
}

// Refuses to clobber existing files unless --force was given.
void guard_overwrite(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) {
    throw Error(ErrorCode::kUsageError,
                "refusing to overwrite " + path.string() + " (pass --force)");
  }
}

// Documents of a BRAT or CoNLL directory. BRAT documents without a .ann are
// returned with no spans.
std::vector<Document> read_documents(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kFileUnreadable, "not a directory: " + dir.string());
  }
  const SplitSource src = detect_split_format(dir);
  if (src.format == CorpusFormat::kConll) {
    return parse_conll(read_file(src.conll_file), std::nullopt, src.conll_file.stem().string());
  }
  std::vector<fs::path> texts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") texts.push_back(entry.path());
  }
  std::sort(texts.begin(), texts.end());
  std::vector<Document> docs;
  for (const auto& txt : texts) {
    fs::path ann = txt;
    ann.replace_extension(".ann");
    BratPair pair{read_file(txt), fs::exists(ann) ? read_file(ann) : std::string()};
    try {
      docs.push_back(parse_brat(pair, txt.stem().string()));
    } catch (const Error& e) {
      throw Error(e.code(), ann.string() + ": " + e.what());
    }
  }
  return docs;
}

std::string conll_name(const fs::path& input) {
  const fs::path canonical = fs::weakly_canonical(input);
  const std::string stem = canonical.filename().string();
  return (stem.empty() ? std::string("corpus") : stem) + ".conll";
}

void write_documents(const std::vector<Document>& docs, const fs::path& out_dir,
                     const std::string& format, const std::string& conll_file, bool force) {
  fs::create_directories(out_dir);
  if (format == "conll") {
    const fs::path target = out_dir / conll_file;
    guard_overwrite(target, force);
    write_file_atomic(target, write_conll(docs, SpanAlignment::kSnapOutward));
    return;
  }
  for (const auto& doc : docs) {
    guard_overwrite(out_dir / (doc.id + ".txt"), force);
    guard_overwrite(out_dir / (doc.id + ".ann"), force);
  }
  for (const auto& doc : docs) write_brat_document(out_dir, doc);
}

int cmd_train(const fs::path& config_path, bool force) {
  std::vector<ConfigWarning> warnings;
  const Config config = load_config(config_path, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}:{}: {}", config_path.string(), w.line, w.message);
  if (!config.run_id.empty()) guard_overwrite(config.output_folder / config.run_id, force);

  TrainHooks hooks;
  hooks.stop_requested = &g_interrupted;
  hooks.on_epoch = [](const EpochRecord& r) {
    std::string line = "epoch " + std::to_string(r.epoch);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  loss %.4f", r.train_loss);
    line += buf;
    for (const auto& m : r.splits) {
      line += "  " + std::string(split_name(m.split)) + " F1 " + format_percent(m.f1);
    }
    std::snprintf(buf, sizeof(buf), "  (%.1fs)", r.seconds);
    line += buf;
    std::cout << line << std::endl;
  };
  const TrainOutcome outcome = train(config, hooks);
  std::cout << "stopped: " << stop_reason_name(outcome.stop_reason) << "; best epoch "
            << outcome.best_epoch << ", valid F1 " << format_percent(outcome.best_valid_f1)
            << "\nrun directory: " << outcome.run_dir.string() << std::endl;
  return outcome.stop_reason == StopReason::kInterrupted ? 130 : 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& input, const fs::path& output,
                const std::string& format, bool force) {
  const Checkpoint model = load_model(model_path);
  const std::vector<Document> docs = read_documents(input);
  if (docs.empty()) {
    spdlog::warn("no documents found in {}; nothing to predict", input.string());
    return 0;
  }
  const auto predicted = predict(model.params, model.vocab, model.config.tagging_format, docs,
                                 model.config.number_of_cpu_threads);
  write_documents(predicted, output, format, conll_name(input), force);
  std::size_t spans = 0;
  for (const auto& d : predicted) spans += d.spans.size();
  std::cout << "tagged " << predicted.size() << " documents, " << spans << " entities -> "
            << output.string() << std::endl;
  return 0;
}

int cmd_evaluate(const fs::path& gold_dir, const fs::path& pred_dir, fs::path report_path,
                 bool force) {
  const std::vector<Document> gold = read_documents(gold_dir);
  const std::vector<Document> pred = read_documents(pred_dir);
  const EvalReport report = evaluate_entities(gold, pred);
  std::cout << format_report(report);
  if (report_path.empty()) report_path = pred_dir / "evaluation.json";
  guard_overwrite(report_path, force);
  write_report(report, {}, report_path);
  std::cout << "report written to " << report_path.string() << std::endl;
  return 0;
}

int cmd_convert(const fs::path& input, const fs::path& output, const std::string& to, bool force) {
  const SplitSource src = detect_split_format(input);
  const std::vector<Document> docs = read_documents(input);
  if (docs.empty()) spdlog::warn("no documents found in {}", input.string());
  if (to == "conll" && src.format == CorpusFormat::kBrat) {
    spdlog::info("BRAT to CoNLL keeps entity spans only; spans not aligned to tokens are widened");
  } else if (to == "brat" && src.format == CorpusFormat::kConll) {
    spdlog::info("CoNLL to BRAT rebuilds text with single spaces between tokens");
  }
  write_documents(docs, output, to, conll_name(input), force);
  std::cout << "converted " << docs.size() << " documents -> " << output.string() << std::endl;
  return 0;
}

int cmd_serve(const fs::path& config_path, const std::string& host, int port,
              const fs::path& ui_dir) {
  std::vector<ConfigWarning> warnings;
  const Config config = load_config(config_path, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}:{}: {}", config_path.string(), w.line, w.message);
  Service service(config, ui_dir);
  const int bound = service.bind(host, port);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (g_interrupted) spdlog::info("shutting down");
    service.stop();
  });
  service.listen();
  done = true;
  watcher.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  install_signal_handlers();

  CLI::App app{"seqforge: BiLSTM-CRF named-entity recognition"};
  app.require_subcommand(1);
  bool force = false;

  fs::path train_config;
  auto* train_cmd = app.add_subcommand("train", "Train a model from an INI configuration");
  train_cmd->add_option("--config", train_config, "Configuration file")->required();
  train_cmd->add_flag("--force", force, "Overwrite an existing run directory");

  fs::path model, predict_in, predict_out;
  std::string predict_format = "brat";
  auto* predict_cmd = app.add_subcommand("predict", "Tag documents with a trained model");
  predict_cmd->add_option("--model", model, "Checkpoint file")->required();
  predict_cmd->add_option("--input", predict_in, "Directory of .txt files or a .conll file")
      ->required();
  predict_cmd->add_option("--output", predict_out, "Output directory")->required();
  predict_cmd->add_option("--format", predict_format, "Output format")
      ->check(CLI::IsMember({"brat", "conll"}));
  predict_cmd->add_flag("--force", force, "Overwrite existing output files");

  fs::path gold_dir, pred_dir, report_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold annotations");
  eval_cmd->add_option("--gold", gold_dir, "Gold directory")->required();
  eval_cmd->add_option("--pred", pred_dir, "Prediction directory")->required();
  eval_cmd->add_option("--report", report_path, "Report file (default: <pred>/evaluation.json)");
  eval_cmd->add_flag("--force", force, "Overwrite an existing report");

  fs::path convert_in, convert_out;
  std::string convert_to;
  auto* convert_cmd = app.add_subcommand("convert", "Convert between BRAT and CoNLL");
  convert_cmd->add_option("--input", convert_in, "Input directory")->required();
  convert_cmd->add_option("--output", convert_out, "Output directory")->required();
  convert_cmd->add_option("--to", convert_to, "Target format")
      ->required()
      ->check(CLI::IsMember({"brat", "conll"}));
  convert_cmd->add_flag("--force", force, "Overwrite existing output files");

  fs::path serve_config, ui_dir;
  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP API");
  serve_cmd->add_option("--config", serve_config, "Configuration file")->required();
  serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)")
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--ui", ui_dir, "Directory of static UI assets served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[UsageError]: " << e.what() << std::endl;
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(train_config, force);
    if (*predict_cmd) return cmd_predict(model, predict_in, predict_out, predict_format, force);
    if (*eval_cmd) return cmd_evaluate(gold_dir, pred_dir, report_path, force);
    if (*convert_cmd) return cmd_convert(convert_in, convert_out, convert_to, force);
    if (*serve_cmd) return cmd_serve(serve_config, host, port, ui_dir);
  } catch (const Error& e) {
    std::cerr << "error[" << e.code_name() << "]: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
