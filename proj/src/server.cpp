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

#include "seqforge/server.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

#include <sys/socket.h>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "seqforge/checkpoint.hpp"
#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"
#include "seqforge/trainer.hpp"
#include "seqforge/utf8.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace seqforge {

std::string_view job_kind_name(JobKind kind) {
  return kind == JobKind::kTrain ? "train" : "predict";
}

std::string_view job_status_name(JobStatus status) {
  switch (status) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

namespace {

constexpr SplitName kAllSplits[] = {SplitName::kTrain, SplitName::kValid, SplitName::kTest,
                                    SplitName::kDeploy};

struct DocumentRef {
  std::string id;  // split/name
  SplitName split;
  std::string name;
  bool editable = true;  // false for documents that live in a CoNLL file
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", std::move(message)}}}});
}

json span_json(const EntitySpan& s) {
  return {{"id", s.id}, {"category", s.category}, {"start", s.start}, {"end", s.end},
          {"surface", s.surface}};
}

json spans_json(const std::vector<EntitySpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back(span_json(s));
  return out;
}

json metrics_json(const EpochRecord& r) {
  json splits = json::object();
  for (const auto& m : r.splits) {
    splits[std::string(split_name(m.split))] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"loss", m.loss}};
  }
  return {{"epoch", r.epoch}, {"seconds", r.seconds}, {"train_loss", r.train_loss},
          {"splits", splits}};
}

json job_json(const JobState& job) {
  json overrides = json::object();
  for (const auto& [k, v] : job.overrides) overrides[k] = v;
  return {{"id", job.id},
          {"kind", job_kind_name(job.kind)},
          {"status", job_status_name(job.status)},
          {"progress", {{"completed_epochs", job.completed_epochs}, {"max_epochs", job.max_epochs}}},
          {"message", job.message},
          {"overrides", overrides},
          {"run_dir", job.run_dir.string()}};
}

std::string etag_of(std::string_view body) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : body) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "\"%016llx\"", static_cast<unsigned long long>(h));
  return buf;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string override_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "True" : "False";
  if (value.is_number()) return value.dump();
  throw Error(ErrorCode::kTypeError, "override values must be strings, numbers or booleans");
}

std::vector<DocumentRef> list_documents(const fs::path& folder) {
  std::vector<DocumentRef> out;
  for (SplitName split : kAllSplits) {
    const fs::path dir = folder / std::string(split_name(split));
    if (!fs::is_directory(dir)) continue;
    const SplitSource src = detect_split_format(dir);
    const std::string prefix = std::string(split_name(split)) + "/";
    if (src.format == CorpusFormat::kConll) {
      for (const auto& d : parse_conll(read_file(src.conll_file), std::nullopt,
                                       src.conll_file.stem().string())) {
        out.push_back({prefix + d.id, split, d.id, false});
      }
      continue;
    }
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        stems.push_back(entry.path().stem().string());
      }
    }
    std::sort(stems.begin(), stems.end());
    for (auto& stem : stems) out.push_back({prefix + stem, split, stem, true});
  }
  return out;
}

std::optional<DocumentRef> find_document(const fs::path& folder, const std::string& id) {
  const auto slash = id.find('/');
  if (slash == std::string::npos) return std::nullopt;
  const auto split = parse_split_name(std::string_view(id).substr(0, slash));
  const std::string name = id.substr(slash + 1);
  if (!split || name.empty() || name.find('/') != std::string::npos || name == "." ||
      name == "..") {
    return std::nullopt;
  }
  for (auto& ref : list_documents(folder)) {
    if (ref.id == id) return ref;
  }
  return std::nullopt;
}

Document load_document(const fs::path& folder, const DocumentRef& ref) {
  const fs::path dir = folder / std::string(split_name(ref.split));
  if (!ref.editable) {
    const SplitSource src = detect_split_format(dir);
    for (auto& d : parse_conll(read_file(src.conll_file), std::nullopt,
                               src.conll_file.stem().string())) {
      if (d.id == ref.name) return d;
    }
    throw Error(ErrorCode::kFileUnreadable, "document " + ref.id + " disappeared");
  }
  BratPair pair;
  pair.text = read_file(dir / (ref.name + ".txt"));
  const fs::path ann = dir / (ref.name + ".ann");
  if (fs::exists(ann)) pair.ann = read_file(ann);
  return parse_brat(pair, ref.name);
}

// Newest checkpoints/best.ckpt below the output folder, if any.
fs::path newest_checkpoint(const fs::path& output_folder) {
  fs::path best;
  fs::file_time_type best_time{};
  if (!fs::is_directory(output_folder)) return best;
  for (const auto& entry : fs::directory_iterator(output_folder)) {
    const fs::path candidate = entry.path() / "checkpoints" / "best.ckpt";
    if (!fs::is_regular_file(candidate)) continue;
    const auto t = fs::last_write_time(candidate);
    if (best.empty() || t > best_time) {
      best = candidate;
      best_time = t;
    }
  }
  return best;
}

fs::path newest_metrics(const fs::path& output_folder) {
  fs::path best;
  fs::file_time_type best_time{};
  if (!fs::is_directory(output_folder)) return best;
  for (const auto& entry : fs::directory_iterator(output_folder)) {
    const fs::path candidate = entry.path() / "metrics.csv";
    if (!fs::is_regular_file(candidate)) continue;
    const auto t = fs::last_write_time(candidate);
    if (best.empty() || t > best_time) {
      best = candidate;
      best_time = t;
    }
  }
  return best;
}

EntitySpan parse_span(const json& j, std::size_t index) {
  auto where = "span " + std::to_string(index);
  if (!j.is_object()) throw Error(ErrorCode::kTypeError, where + " is not an object");
  EntitySpan s;
  try {
    s.id = j.value("id", std::string());
    s.category = j.at("category").get<std::string>();
    const auto start = j.at("start").get<long long>();
    const auto end = j.at("end").get<long long>();
    if (start < 0 || end < 0) throw Error(ErrorCode::kTypeError, where + ": negative offset");
    s.start = static_cast<std::size_t>(start);
    s.end = static_cast<std::size_t>(end);
    s.surface = j.value("surface", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kTypeError, where + ": " + e.what());
  }
  return s;
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>seqforge</title></head>"
    "<body><h1>seqforge</h1><p>No UI assets installed. JSON API:</p><ul>"
    "<li>GET /api/health</li><li>GET /api/documents[?split=]</li>"
    "<li>GET /api/documents/{split}/{name}</li>"
    "<li>PUT /api/documents/{split}/{name}/annotations</li>"
    "<li>POST /api/jobs</li><li>GET /api/jobs/{id}</li>"
    "<li>GET /api/metrics/history[?job=]</li></ul></body></html>";

}  // namespace

Service::Service(Config config, fs::path static_dir)
    : config_(std::move(config)),
      static_dir_(std::move(static_dir)),
      http_(std::make_unique<httplib::Server>()) {
  register_routes();
  worker_ = std::thread([this] { worker_loop(); });
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (http_->bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    throw Error(ErrorCode::kIoError,
                "cannot listen on " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  return bound;
}

void Service::listen() { http_->listen_after_bind(); }

bool Service::running() const { return !shutting_down_ && http_->is_running(); }

void Service::stop() {
  if (shutting_down_.exchange(true)) return;
  stop_requested_ = true;
  http_->stop();
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_cv_.notify_all();
  }
  if (worker_.joinable()) worker_.join();
}

std::shared_ptr<std::mutex> Service::document_lock(const std::string& id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = document_locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

void Service::register_routes() {
  auto& svr = *http_;
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // lets a second server silently share a busy port.
  svr.set_socket_options([](int sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type, If-None-Match"},
                           {"Access-Control-Expose-Headers", "ETag"}});
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const Error& e) {
          send_error(res, 500, e.code_name(), e.what());
        } catch (const std::exception& e) {
          send_error(res, 500, "Internal", e.what());
        }
      });

  svr.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  svr.Get("/api/documents", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<SplitName> filter;
    if (req.has_param("split")) {
      filter = parse_split_name(req.get_param_value("split"));
      if (!filter) {
        send_error(res, 400, "UsageError", "unknown split '" + req.get_param_value("split") + "'");
        return;
      }
    }
    json out = json::array();
    for (const auto& ref : list_documents(config_.dataset_folder)) {
      if (filter && ref.split != *filter) continue;
      json entry = {{"id", ref.id}, {"split", split_name(ref.split)}, {"editable", ref.editable}};
      try {
        entry["span_count"] = load_document(config_.dataset_folder, ref).spans.size();
      } catch (const Error& e) {
        entry["span_count"] = nullptr;
        entry["error"] = {{"code", e.code_name()}, {"message", e.what()}};
      }
      out.push_back(entry);
    }
    send_json(res, 200, out);
  });

  svr.Get(R"(/api/documents/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto ref = find_document(config_.dataset_folder, id);
    if (!ref) {
      send_error(res, 404, "NotFound", "unknown document '" + id + "'");
      return;
    }
    Document doc;
    {
      auto lock = document_lock(ref->id);
      std::lock_guard guard(*lock);
      doc = load_document(config_.dataset_folder, *ref);
    }
    json body = {{"id", ref->id},
                 {"split", split_name(ref->split)},
                 {"editable", ref->editable},
                 {"text", doc.text},
                 {"length", utf8::length(doc.text)},
                 {"spans", spans_json(doc.spans)}};
    std::lock_guard lock(jobs_mutex_);
    if (auto it = predictions_.find(ref->id); it != predictions_.end()) {
      body["predicted_spans"] = spans_json(it->second);
    }
    send_json(res, 200, body);
  });

  svr.Put(R"(/api/documents/(.+)/annotations)", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto ref = find_document(config_.dataset_folder, id);
    if (!ref) {
      send_error(res, 404, "NotFound", "unknown document '" + id + "'");
      return;
    }
    if (!ref->editable) {
      send_error(res, 409, "ReadOnly", "document '" + id + "' is stored in a CoNLL file");
      return;
    }
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      send_error(res, 400, "MalformedJson", "request body is not valid JSON");
      return;
    }
    const json& list = body.is_object() && body.contains("spans") ? body["spans"] : body;
    if (!list.is_array()) {
      send_error(res, 400, "TypeError", "expected a span list or {\"spans\": [...]}");
      return;
    }

    auto lock = document_lock(ref->id);
    std::lock_guard guard(*lock);
    Document doc = load_document(config_.dataset_folder, *ref);
    doc.spans.clear();
    try {
      for (std::size_t i = 0; i < list.size(); ++i) doc.spans.push_back(parse_span(list[i], i));
    } catch (const Error& e) {
      send_error(res, 400, e.code_name(), e.what());
      return;
    }
    // Missing ids and surfaces are filled in; everything else must validate.
    std::size_t next_id = 1;
    for (const auto& s : doc.spans) {
      if (s.id.size() > 1 && s.id[0] == 'T' &&
          std::all_of(s.id.begin() + 1, s.id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        next_id = std::max<std::size_t>(next_id, std::stoull(s.id.substr(1)) + 1);
      }
    }
    const std::size_t length = utf8::length(doc.text);
    for (auto& s : doc.spans) {
      if (s.id.empty()) s.id = "T" + std::to_string(next_id++);
      if (s.surface.empty() && s.start < s.end && s.end <= length) {
        s.surface = utf8::slice(doc.text, s.start, s.end);
      }
    }

    json violations = json::array();
    for (const auto& v : validate_document(doc)) {
      violations.push_back(
          {{"kind", violation_kind_name(v.kind)}, {"span_id", v.span_id}, {"message", v.message}});
    }
    if (violations.empty()) {
      // The spans must also survive the BRAT line grammar unchanged.
      try {
        const Document reread = parse_brat(write_brat(doc), doc.id);
        std::vector<EntitySpan> a = reread.spans, b = doc.spans;
        auto by_id = [](const EntitySpan& x, const EntitySpan& y) { return x.id < y.id; };
        std::sort(a.begin(), a.end(), by_id);
        std::sort(b.begin(), b.end(), by_id);
        if (a != b) throw Error(ErrorCode::kMalformedAnnLine, "spans do not survive BRAT encoding");
      } catch (const Error& e) {
        violations.push_back({{"kind", "brat_format"}, {"span_id", ""}, {"message", e.what()}});
      }
    }
    if (!violations.empty()) {
      send_json(res, 422, {{"violations", violations}});
      return;
    }
    write_brat_document(config_.dataset_folder / std::string(split_name(ref->split)), doc);
    const Document stored = load_document(config_.dataset_folder, *ref);
    spdlog::info("saved {} spans for {}", stored.spans.size(), ref->id);
    send_json(res, 200, {{"id", ref->id}, {"spans", spans_json(stored.spans)}});
  });

  svr.Post("/api/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body.empty() ? std::string("{}") : req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      send_error(res, 400, "MalformedJson", "request body must be a JSON object");
      return;
    }
    const std::string kind_text = body.value("kind", std::string("train"));
    if (kind_text != "train" && kind_text != "predict") {
      send_error(res, 400, "UsageError", "kind must be 'train' or 'predict'");
      return;
    }
    const JobKind kind = kind_text == "train" ? JobKind::kTrain : JobKind::kPredict;
    JobState job;
    job.kind = kind;
    Config effective = config_;
    try {
      if (body.contains("overrides")) {
        if (!body["overrides"].is_object()) {
          throw Error(ErrorCode::kTypeError, "overrides must be an object");
        }
        for (const auto& [key, value] : body["overrides"].items()) {
          job.overrides[key] = override_text(value);
        }
      }
      for (const auto& [key, value] : job.overrides) {
        if (key == "dataset_folder" || key == "output_folder") {
          throw Error(ErrorCode::kUsageError, key + " is fixed by the server configuration");
        }
        if (kind == JobKind::kPredict && key == "model") continue;
        apply_config_value(effective, key, value);
      }
      validate_config(effective);
    } catch (const Error& e) {
      send_error(res, 400, e.code_name(), e.what());
      return;
    }
    job.max_epochs = kind == JobKind::kTrain ? effective.maximum_number_of_epochs : 0;

    std::lock_guard lock(jobs_mutex_);
    if (shutting_down_) {
      send_error(res, 503, "ShuttingDown", "server is stopping");
      return;
    }
    if (kind == JobKind::kTrain) {
      for (const auto& [id, other] : jobs_) {
        if (other.kind == JobKind::kTrain &&
            (other.status == JobStatus::kQueued || other.status == JobStatus::kRunning)) {
          send_error(res, 409, "Conflict",
                     "training job " + std::to_string(id) + " is already " +
                         std::string(job_status_name(other.status)));
          return;
        }
      }
    }
    job.id = next_job_id_++;
    if (kind == JobKind::kTrain) last_train_job_ = job.id;
    const std::uint64_t id = job.id;
    jobs_.emplace(id, std::move(job));
    queue_.push_back(id);
    jobs_cv_.notify_all();
    send_json(res, 202, {{"job_id", id}, {"status", "queued"}});
  });

  svr.Get(R"(/api/jobs/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = std::stoull(std::string(req.matches[1]));
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) {
      send_error(res, 404, "NotFound", "unknown job " + std::to_string(id));
      return;
    }
    send_json(res, 200, job_json(it->second));
  });

  svr.Get("/api/jobs", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    std::lock_guard lock(jobs_mutex_);
    for (const auto& [id, job] : jobs_) out.push_back(job_json(job));
    send_json(res, 200, out);
  });

  svr.Get("/api/metrics/history", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    std::optional<std::uint64_t> job_id;
    if (req.has_param("job")) {
      const std::string text = req.get_param_value("job");
      if (text.empty() || !std::all_of(text.begin(), text.end(), ::isdigit)) {
        send_error(res, 400, "UsageError", "job must be a number");
        return;
      }
      job_id = std::stoull(text);
    }
    {
      std::lock_guard lock(jobs_mutex_);
      if (job_id && !jobs_.contains(*job_id)) {
        send_error(res, 404, "NotFound", "unknown job " + std::to_string(*job_id));
        return;
      }
      if (!job_id) job_id = last_train_job_;
      if (job_id) {
        const JobState& job = jobs_.at(*job_id);
        json epochs = json::array();
        for (const auto& r : job.history) epochs.push_back(metrics_json(r));
        body = {{"job_id", job.id}, {"source", "job"}, {"epochs", epochs}};
      }
    }
    if (body.is_null()) {
      json epochs = json::array();
      const fs::path csv = newest_metrics(config_.output_folder);
      if (!csv.empty()) {
        for (const auto& r : parse_metrics_csv(read_file(csv))) epochs.push_back(metrics_json(r));
      }
      body = {{"job_id", nullptr},
              {"source", csv.empty() ? std::string() : csv.string()},
              {"epochs", epochs}};
    }
    const std::string text = body.dump();
    const std::string etag = etag_of(text);
    res.set_header("ETag", etag);
    res.set_header("Cache-Control", "no-cache");
    if (req.get_header_value("If-None-Match") == etag) {
      res.status = 304;
      return;
    }
    res.status = 200;
    res.set_content(text, "application/json");
  });

  if (!static_dir_.empty() && fs::is_directory(static_dir_)) {
    svr.set_mount_point("/", static_dir_.string());
  } else {
    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

void Service::worker_loop() {
  for (;;) {
    std::uint64_t id = 0;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stop_requested_ || !queue_.empty(); });
      if (stop_requested_) {
        for (auto queued : queue_) {
          jobs_.at(queued).status = JobStatus::kFailed;
          jobs_.at(queued).message = "server stopped before the job started";
        }
        queue_.clear();
        return;
      }
      id = queue_.front();
      queue_.pop_front();
      jobs_.at(id).status = JobStatus::kRunning;
    }
    run_job(id);
  }
}

void Service::run_job(std::uint64_t id) {
  JobState snapshot;
  {
    std::lock_guard lock(jobs_mutex_);
    snapshot = jobs_.at(id);
  }
  auto finish = [&](JobStatus status, std::string message, fs::path run_dir = {}) {
    std::lock_guard lock(jobs_mutex_);
    JobState& job = jobs_.at(id);
    job.status = status;
    job.message = std::move(message);
    if (!run_dir.empty()) job.run_dir = std::move(run_dir);
    spdlog::info("job {} {}: {}", id, job_status_name(status), job.message);
  };

  try {
    Config config = config_;
    for (const auto& [key, value] : snapshot.overrides) {
      if (key != "model") apply_config_value(config, key, value);
    }
    if (snapshot.kind == JobKind::kTrain) {
      if (!snapshot.overrides.contains("run_id")) {
        config.run_id = "job" + std::to_string(id) + "-" + timestamp();
      }
      {
        std::lock_guard lock(jobs_mutex_);
        jobs_.at(id).run_dir = config.output_folder / config.run_id;
      }
      TrainHooks hooks;
      hooks.stop_requested = &stop_requested_;
      hooks.on_epoch = [&](const EpochRecord& record) {
        std::lock_guard lock(jobs_mutex_);
        JobState& job = jobs_.at(id);
        job.history.push_back(record);
        job.completed_epochs = record.epoch;
      };
      const TrainOutcome outcome = train(config, hooks);
      if (outcome.stop_reason == StopReason::kInterrupted) {
        finish(JobStatus::kFailed, "interrupted", outcome.run_dir);
        return;
      }
      {
        std::lock_guard lock(jobs_mutex_);
        latest_checkpoint_ = outcome.best_checkpoint;
      }
      refresh_predictions(outcome.best_checkpoint, outcome.run_dir / "predictions");
      char summary[160];
      std::snprintf(summary, sizeof(summary), "stopped (%s); best epoch %d, valid F1 %s",
                    std::string(stop_reason_name(outcome.stop_reason)).c_str(), outcome.best_epoch,
                    format_percent(outcome.best_valid_f1).c_str());
      finish(JobStatus::kDone, summary, outcome.run_dir);
    } else {
      fs::path checkpoint;
      if (auto it = snapshot.overrides.find("model"); it != snapshot.overrides.end()) {
        checkpoint = it->second;
      } else {
        std::lock_guard lock(jobs_mutex_);
        checkpoint = latest_checkpoint_;
      }
      if (checkpoint.empty()) checkpoint = newest_checkpoint(config.output_folder);
      if (checkpoint.empty()) {
        finish(JobStatus::kFailed, "no trained model available; run a train job first");
        return;
      }
      const fs::path out = config.output_folder / ("predict-job" + std::to_string(id) + "-" +
                                                   timestamp());
      refresh_predictions(checkpoint, out);
      finish(JobStatus::kDone, "predicted with " + checkpoint.string(), out);
    }
  } catch (const Error& e) {
    finish(JobStatus::kFailed, "error[" + std::string(e.code_name()) + "]: " + e.what());
  } catch (const std::exception& e) {
    finish(JobStatus::kFailed, e.what());
  }
}

void Service::refresh_predictions(const fs::path& checkpoint, const fs::path& out_dir) {
  const Checkpoint model = load_model(checkpoint);
  std::map<std::string, std::vector<EntitySpan>> fresh;
  std::map<SplitName, std::vector<Document>> by_split;
  for (const auto& ref : list_documents(config_.dataset_folder)) {
    Document doc;
    {
      auto lock = document_lock(ref.id);
      std::lock_guard guard(*lock);
      if (ref.editable) {
        doc.id = ref.name;
        doc.text = read_file(config_.dataset_folder / std::string(split_name(ref.split)) /
                             (ref.name + ".txt"));
      } else {
        doc = load_document(config_.dataset_folder, ref);
        doc.spans.clear();
      }
    }
    by_split[ref.split].push_back(std::move(doc));
  }
  for (auto& [split, docs] : by_split) {
    const auto predicted = predict(model.params, model.vocab, model.config.tagging_format, docs,
                                   config_.number_of_cpu_threads);
    const fs::path dir = out_dir / std::string(split_name(split));
    fs::create_directories(dir);
    for (const auto& doc : predicted) {
      write_brat_document(dir, doc);
      fresh[std::string(split_name(split)) + "/" + doc.id] = doc.spans;
    }
  }
  std::lock_guard lock(jobs_mutex_);
  predictions_ = std::move(fresh);
}

}  // namespace seqforge
