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

#include "seqforge/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include <spdlog/spdlog.h>

#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"

namespace seqforge {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void type_error(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::kTypeError, "key '" + std::string(key) + "': '" + std::string(value) +
                                         "' is not " + std::string(want));
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  type_error(key, value, "a boolean");
}

long long to_int(std::string_view key, std::string_view value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) type_error(key, value, "an integer");
  return out;
}

std::uint64_t to_uint64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    type_error(key, value, "a non-negative integer");
  }
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    type_error(key, value, "a number");
  }
  return out;
}

int to_dim(std::string_view key, std::string_view value) {
  const long long v = to_int(key, value);
  if (v < -1000000000LL || v > 1000000000LL) type_error(key, value, "a 32-bit integer");
  return static_cast<int>(v);
}

using Setter = std::function<void(Config&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset_folder", [](Config& c, auto, auto v) { c.dataset_folder = std::string(v); }},
      {"using_character_lstm", [](Config& c, auto k, auto v) { c.using_character_lstm = to_bool(k, v); }},
      {"char_embedding_dimension", [](Config& c, auto k, auto v) { c.char_embedding_dimension = to_dim(k, v); }},
      {"char_lstm_dimension", [](Config& c, auto k, auto v) { c.char_lstm_dimension = to_dim(k, v); }},
      {"token_emb_pretrained_file", [](Config& c, auto, auto v) { c.token_emb_pretrained_file = std::string(v); }},
      {"token_embedding_dimension", [](Config& c, auto k, auto v) { c.token_embedding_dimension = to_dim(k, v); }},
      {"token_lstm_dimension", [](Config& c, auto k, auto v) { c.token_lstm_dimension = to_dim(k, v); }},
      {"using_crf", [](Config& c, auto k, auto v) { c.using_crf = to_bool(k, v); }},
      {"random_initial_transitions", [](Config& c, auto k, auto v) { c.random_initial_transitions = to_bool(k, v); }},
      {"dropout", [](Config& c, auto k, auto v) { c.dropout = to_double(k, v); }},
      {"patience", [](Config& c, auto k, auto v) { c.patience = to_dim(k, v); }},
      {"maximum_number_of_epochs", [](Config& c, auto k, auto v) { c.maximum_number_of_epochs = to_dim(k, v); }},
      {"maximum_training_time", [](Config& c, auto k, auto v) { c.maximum_training_time = to_double(k, v); }},
      {"number_of_cpu_threads", [](Config& c, auto k, auto v) { c.number_of_cpu_threads = to_dim(k, v); }},
      {"learning_rate", [](Config& c, auto k, auto v) { c.learning_rate = to_double(k, v); }},
      {"gradient_clip", [](Config& c, auto k, auto v) { c.gradient_clip = to_double(k, v); }},
      {"tagging_format",
       [](Config& c, auto k, auto v) {
         const std::string f = lower(v);
         if (f == "bio") {
           c.tagging_format = TaggingFormat::kBio;
         } else if (f == "bioes") {
           c.tagging_format = TaggingFormat::kBioes;
         } else {
           type_error(k, v, "one of bio, bioes");
         }
       }},
      {"seed", [](Config& c, auto k, auto v) { c.seed = to_uint64(k, v); }},
      {"vocab_only_embedded", [](Config& c, auto k, auto v) { c.vocab_only_embedded = to_bool(k, v); }},
      {"output_folder", [](Config& c, auto, auto v) { c.output_folder = std::string(v); }},
      {"run_id", [](Config& c, auto, auto v) { c.run_id = std::string(v); }},
      {"log_elapsed_time", [](Config& c, auto k, auto v) { c.log_elapsed_time = to_bool(k, v); }},
  };
  return table;
}

[[noreturn]] void range_error(const std::string& message) {
  throw Error(ErrorCode::kRangeError, message);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_value(Config& config, std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) {
    throw Error(ErrorCode::kTypeError, "unknown configuration key '" + std::string(key) + "'");
  }
  it->second(config, key, trim(value));
}

void validate_config(const Config& c) {
  auto positive = [](const char* key, int v) {
    if (v <= 0) range_error(std::string(key) + " must be > 0, got " + std::to_string(v));
  };
  if (c.using_character_lstm) {
    positive("char_embedding_dimension", c.char_embedding_dimension);
    positive("char_lstm_dimension", c.char_lstm_dimension);
  }
  positive("token_embedding_dimension", c.token_embedding_dimension);
  positive("token_lstm_dimension", c.token_lstm_dimension);
  positive("maximum_number_of_epochs", c.maximum_number_of_epochs);
  positive("number_of_cpu_threads", c.number_of_cpu_threads);
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) {
    range_error("dropout must be in [0, 1), got " + format_double(c.dropout));
  }
  if (c.patience < 0) range_error("patience must be >= 0");
  if (!(c.maximum_training_time > 0.0)) range_error("maximum_training_time must be > 0 hours");
  if (!(c.learning_rate > 0.0)) range_error("learning_rate must be > 0");
  if (!(c.gradient_clip >= 0.0)) range_error("gradient_clip must be >= 0");
}

Config parse_config(std::string_view text, std::vector<ConfigWarning>* warnings) {
  Config config;
  bool have_dataset = false;
  std::map<std::string, int, std::less<>> seen;
  auto warn = [&](int line, std::string message) {
    if (warnings == nullptr) {
      spdlog::warn("config line {}: {}", line, message);
    } else {
      warnings->push_back({line, std::move(message)});
    }
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    // Inline comments need a whitespace before the marker so paths keep '#'.
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') &&
          std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::kTypeError,
                    "config line " + std::to_string(line_no) + ": malformed section header");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kTypeError,
                  "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (setters().find(key) == setters().end()) {
      warn(line_no, "unknown key '" + std::string(key) + "' ignored");
      continue;
    }
    if (++seen[std::string(key)] > 1) {
      warn(line_no, "key '" + std::string(key) + "' repeated; last value wins");
    }
    apply_config_value(config, key, value);
    if (key == "dataset_folder") have_dataset = !value.empty();
  }
  if (!have_dataset) {
    throw Error(ErrorCode::kMissingRequiredKey, "required key 'dataset_folder' is missing");
  }
  validate_config(config);
  return config;
}

Config load_config(const std::filesystem::path& path, std::vector<ConfigWarning>* warnings) {
  Config config = parse_config(read_file(path), warnings);
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = (base / p).lexically_normal();
  };
  resolve(config.dataset_folder);
  resolve(config.token_emb_pretrained_file);
  resolve(config.output_folder);
  return config;
}

std::string to_ini(const Config& c) {
  auto b = [](bool v) { return v ? "True" : "False"; };
  std::string out;
  out += "[dataset]\n";
  out += "dataset_folder = " + c.dataset_folder.string() + "\n\n";
  out += "[character_lstm]\n";
  out += std::string("using_character_lstm = ") + b(c.using_character_lstm) + "\n";
  out += "char_embedding_dimension = " + std::to_string(c.char_embedding_dimension) + "\n";
  out += "char_lstm_dimension = " + std::to_string(c.char_lstm_dimension) + "\n\n";
  out += "[token_lstm]\n";
  out += "token_emb_pretrained_file = " + c.token_emb_pretrained_file.string() + "\n";
  out += "token_embedding_dimension = " + std::to_string(c.token_embedding_dimension) + "\n";
  out += "token_lstm_dimension = " + std::to_string(c.token_lstm_dimension) + "\n\n";
  out += "[crf]\n";
  out += std::string("using_crf = ") + b(c.using_crf) + "\n";
  out += std::string("random_initial_transitions = ") + b(c.random_initial_transitions) + "\n\n";
  out += "[training]\n";
  out += "dropout = " + format_double(c.dropout) + "\n";
  out += "patience = " + std::to_string(c.patience) + "\n";
  out += "maximum_number_of_epochs = " + std::to_string(c.maximum_number_of_epochs) + "\n";
  out += "maximum_training_time = " + format_double(c.maximum_training_time) + "\n";
  out += "number_of_cpu_threads = " + std::to_string(c.number_of_cpu_threads) + "\n";
  out += "learning_rate = " + format_double(c.learning_rate) + "\n";
  out += "gradient_clip = " + format_double(c.gradient_clip) + "\n";
  out += std::string("tagging_format = ") +
         (c.tagging_format == TaggingFormat::kBio ? "bio" : "bioes") + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += std::string("vocab_only_embedded = ") + b(c.vocab_only_embedded) + "\n";
  out += "output_folder = " + c.output_folder.string() + "\n";
  out += "run_id = " + c.run_id + "\n";
  out += std::string("log_elapsed_time = ") + b(c.log_elapsed_time) + "\n";
  return out;
}

}  // namespace seqforge
