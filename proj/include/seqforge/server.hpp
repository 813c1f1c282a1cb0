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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "seqforge/config.hpp"
#include "seqforge/corpus.hpp"
#include "seqforge/evaluator.hpp"

namespace httplib {
class Server;
}

namespace seqforge {

enum class JobKind { kTrain, kPredict };
enum class JobStatus { kQueued, kRunning, kDone, kFailed };

std::string_view job_kind_name(JobKind kind);
std::string_view job_status_name(JobStatus status);

struct JobState {
  std::uint64_t id = 0;
  JobKind kind = JobKind::kTrain;
  JobStatus status = JobStatus::kQueued;
  int completed_epochs = 0;
  int max_epochs = 0;
  std::string message;
  std::map<std::string, std::string> overrides;
  std::filesystem::path run_dir;
  std::vector<EpochRecord> history;
};

// JSON API over a dataset folder. The BRAT files on disk are the only
// persistent state; jobs live in memory and run on one worker thread.
//
// Document ids are "<split>/<name>", e.g. "train/doc1".
class Service {
 public:
  explicit Service(Config config, std::filesystem::path static_dir = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds to host:port (port 0 picks a free one) and returns the bound
  // port. Throws IoError when the address is unavailable.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call after bind().
  void listen();
  // Stops accepting requests, interrupts a running job and joins the worker.
  void stop();
  bool running() const;

 private:
  void register_routes();
  void worker_loop();
  void run_job(std::uint64_t id);
  void refresh_predictions(const std::filesystem::path& checkpoint,
                           const std::filesystem::path& out_dir);
  std::shared_ptr<std::mutex> document_lock(const std::string& id);

  Config config_;
  std::filesystem::path static_dir_;
  std::unique_ptr<httplib::Server> http_;

  mutable std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::map<std::uint64_t, JobState> jobs_;
  std::deque<std::uint64_t> queue_;
  std::uint64_t next_job_id_ = 1;
  std::optional<std::uint64_t> last_train_job_;
  std::filesystem::path latest_checkpoint_;
  std::map<std::string, std::vector<EntitySpan>> predictions_;

  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> document_locks_;

  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> shutting_down_{false};
  std::thread worker_;
};

}  // namespace seqforge
