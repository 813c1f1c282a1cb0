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

#include <array>
#include <chrono>
#include <cstdio>
#include <regex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "seqforge/format_io.hpp"
#include "support.hpp"

namespace seqforge {
namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

RunResult run_cli(const std::vector<std::string>& args) {
  std::string cmd = quote(testing::cli_path().string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Every error line is "error[Code]: message" on a single line.
void expect_error_code(const RunResult& r, const std::string& code) {
  EXPECT_NE(r.exit_code, 0) << r.output;
  const std::regex line("(^|\n)error\\[" + code + "\\]: [^\n]+\n");
  EXPECT_TRUE(std::regex_search(r.output, line)) << r.output;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = testing::toy_config_in(dir_.path());
    config_path_ = config_.dataset_folder / "toy.ini";
    // Point outputs into the scratch dir and pin the run id.
    std::string ini = testing::slurp(config_path_);
    ini += "\noutput_folder = " + (dir_ / "output").string() + "\nrun_id = cli\n";
    write_file_atomic(config_path_, ini);
  }

  // Trains once per test that needs a model.
  fs::path trained_model() {
    const RunResult r = run_cli({"train", "--config", config_path_.string()});
    EXPECT_EQ(r.exit_code, 0) << r.output;
    return dir_ / "output" / "cli" / "checkpoints" / "best.ckpt";
  }

  testing::ScratchDir dir_{"cli"};
  Config config_;
  fs::path config_path_;
};

TEST_F(CliTest, HelpExitsZeroForEverySubcommand) {
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
  for (const char* sub : {"train", "predict", "evaluate", "convert", "serve"}) {
    const RunResult r = run_cli({sub, "--help"});
    EXPECT_EQ(r.exit_code, 0) << sub;
    EXPECT_NE(r.output.find("Usage"), std::string::npos) << sub;
  }
}

TEST_F(CliTest, UsageErrors) {
  expect_error_code(run_cli({}), "UsageError");
  expect_error_code(run_cli({"dance"}), "UsageError");
  expect_error_code(run_cli({"train", "--config", config_path_.string(), "--bogus"}), "UsageError");
  expect_error_code(run_cli({"convert", "--input", "a", "--output", "b", "--to", "xml"}), "UsageError");
}

TEST_F(CliTest, TrainWritesMetricsAndGuardsExistingRuns) {
  const RunResult r = run_cli({"train", "--config", config_path_.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("epoch 1 "), std::string::npos);
  EXPECT_NE(r.output.find("stopped: patience"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "output" / "cli" / "metrics.csv"));

  expect_error_code(run_cli({"train", "--config", config_path_.string()}), "UsageError");
  EXPECT_EQ(run_cli({"train", "--config", config_path_.string(), "--force"}).exit_code, 0);
}

TEST_F(CliTest, TrainConfigErrors) {
  expect_error_code(run_cli({"train", "--config", (dir_ / "missing.ini").string()}), "FileUnreadable");
  write_file_atomic(dir_ / "bad.ini", "[training]\npatience = 3\n");
  const RunResult r = run_cli({"train", "--config", (dir_ / "bad.ini").string()});
  expect_error_code(r, "MissingRequiredKey");
  EXPECT_NE(r.output.find("dataset_folder"), std::string::npos);
}

TEST_F(CliTest, PredictEvaluateOnTrainingText) {
  const fs::path model = trained_model();
  const fs::path pred = dir_ / "pred";
  const fs::path train = config_.dataset_folder / "train";
  RunResult r = run_cli({"predict", "--model", model.string(), "--input", train.string(), "--output",
                         pred.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* stem : {"train1", "train2", "train3", "train4"}) {
    const Document gold = parse_brat({read_file(train / (std::string(stem) + ".txt")),
                                      read_file(train / (std::string(stem) + ".ann"))},
                                     stem);
    const Document got = parse_brat({read_file(pred / (std::string(stem) + ".txt")),
                                     read_file(pred / (std::string(stem) + ".ann"))},
                                    stem);
    ASSERT_EQ(got.spans.size(), gold.spans.size()) << stem;
    for (std::size_t i = 0; i < gold.spans.size(); ++i) {
      EXPECT_EQ(got.spans[i].category, gold.spans[i].category);
      EXPECT_EQ(got.spans[i].start, gold.spans[i].start);
      EXPECT_EQ(got.spans[i].end, gold.spans[i].end);
    }
  }

  r = run_cli({"evaluate", "--gold", train.string(), "--pred", pred.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("100.0"), std::string::npos) << r.output;
  EXPECT_TRUE(fs::exists(pred / "evaluation.json"));
  expect_error_code(run_cli({"evaluate", "--gold", train.string(), "--pred", pred.string()}),
                    "UsageError");

  // Existing outputs need --force.
  expect_error_code(run_cli({"predict", "--model", model.string(), "--input", train.string(),
                             "--output", pred.string()}),
                    "UsageError");
  r = run_cli({"predict", "--model", model.string(), "--input", train.string(), "--output",
               (dir_ / "pred.conll").string(), "--format", "conll"});
  EXPECT_EQ(r.exit_code, 0) << r.output;
}

TEST_F(CliTest, PredictEdgeCases) {
  const fs::path model = trained_model();
  fs::create_directories(dir_ / "empty");
  const RunResult r = run_cli({"predict", "--model", model.string(), "--input",
                               (dir_ / "empty").string(), "--output", (dir_ / "none").string()});
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("[warning]"), std::string::npos) << r.output;

  const std::string bytes = testing::slurp(model);
  write_file_atomic(dir_ / "corrupt.ckpt", bytes.substr(0, bytes.size() / 2));
  expect_error_code(run_cli({"predict", "--model", (dir_ / "corrupt.ckpt").string(), "--input",
                             (config_.dataset_folder / "deploy").string(), "--output",
                             (dir_ / "x").string()}),
                    "CorruptCheckpoint");
}

TEST_F(CliTest, ConvertRoundTripAndCanonicalCopy) {
  const fs::path train = config_.dataset_folder / "train";
  RunResult r = run_cli({"convert", "--input", train.string(), "--output", (dir_ / "conll").string(),
                         "--to", "conll"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const fs::path conll_file = dir_ / "conll" / "train.conll";
  ASSERT_TRUE(fs::exists(conll_file));
  fs::create_directories(dir_ / "conll_in");
  fs::copy_file(conll_file, dir_ / "conll_in" / "train.conll");
  r = run_cli({"convert", "--input", (dir_ / "conll_in").string(), "--output",
               (dir_ / "back").string(), "--to", "brat"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  // CoNLL documents have no ids of their own: compare the span multiset
  // (category plus surface) over the whole split.
  std::multiset<std::pair<std::string, std::string>> before, after;
  for (const auto& d : load_split(train, SplitName::kTrain).documents) {
    for (const auto& s : d.spans) before.insert({s.category, s.surface});
  }
  for (const auto& d : load_split(dir_ / "back", SplitName::kTrain).documents) {
    for (const auto& s : d.spans) after.insert({s.category, s.surface});
  }
  EXPECT_EQ(before, after);

  // BRAT to BRAT writes the canonical form.
  fs::create_directories(dir_ / "messy");
  write_file_atomic(dir_ / "messy" / "m.txt", "Paris and Berlin");
  write_file_atomic(dir_ / "messy" / "m.ann", "T10\tLOC 10 16\tBerlin\r\nT2\tLOC 0 5\tParis");
  r = run_cli({"convert", "--input", (dir_ / "messy").string(), "--output", (dir_ / "clean").string(),
               "--to", "brat"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(testing::slurp(dir_ / "clean" / "m.ann"), "T2\tLOC 0 5\tParis\nT10\tLOC 10 16\tBerlin\n");
  EXPECT_EQ(testing::slurp(dir_ / "clean" / "m.txt"), "Paris and Berlin");
}

TEST_F(CliTest, ConvertMalformedAnnotationNamesTheLine) {
  fs::create_directories(dir_ / "broken");
  write_file_atomic(dir_ / "broken" / "b.txt", "Paris");
  write_file_atomic(dir_ / "broken" / "b.ann", "T1\tLOC 0 5\tParis\nT2 LOC zero\n");
  const RunResult r = run_cli({"convert", "--input", (dir_ / "broken").string(), "--output",
                               (dir_ / "out").string(), "--to", "conll"});
  expect_error_code(r, "MalformedAnnLine");
  EXPECT_NE(r.output.find("line 2"), std::string::npos) << r.output;
}

class ServeProcess {
 public:
  explicit ServeProcess(const std::vector<std::string>& args) {
    pid_ = ::fork();
    if (pid_ == 0) {
      std::vector<std::string> all = {testing::cli_path().string()};
      all.insert(all.end(), args.begin(), args.end());
      std::vector<char*> argv;
      for (auto& a : all) argv.push_back(a.data());
      argv.push_back(nullptr);
      ::execv(argv[0], argv.data());
      ::_exit(127);
    }
  }
  ~ServeProcess() {
    if (pid_ > 0 && !reaped_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }
  int interrupt_and_wait() {
    ::kill(pid_, SIGINT);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    reaped_ = true;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  pid_t pid_ = -1;
  bool reaped_ = false;
};

// Asks the kernel for an unused port and releases it again.
int free_port() {
  const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(sock);
  return ntohs(addr.sin_port);
}

TEST_F(CliTest, ServeAnswersHealthAndStopsOnSigint) {
  const int port = free_port();
  ServeProcess serve({"serve", "--config", config_path_.string(), "--port", std::to_string(port)});
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1, 0);
  client.set_read_timeout(5, 0);
  bool up = false;
  for (int i = 0; i < 300 && !up; ++i) {
    auto res = client.Get("/api/health");
    up = res && res->status == 200;
    if (!up) std::this_thread::sleep_for(20ms);
  }
  ASSERT_TRUE(up);

  // A second server on the same port fails.
  expect_error_code(run_cli({"serve", "--config", config_path_.string(), "--port",
                             std::to_string(port)}),
                    "IoError");
  EXPECT_EQ(serve.interrupt_and_wait(), 0);
}

}  // namespace
}  // namespace seqforge
