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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "seqforge/corpus.hpp"

namespace seqforge {

// Typed mirror of the INI configuration file. Key names are the file's key
// names; section headers are decorative and keys are global.
struct Config {
  // [dataset]
  std::filesystem::path dataset_folder;
  // [character_lstm]
  bool using_character_lstm = true;
  int char_embedding_dimension = 25;
  int char_lstm_dimension = 50;
  // [token_lstm]
  std::filesystem::path token_emb_pretrained_file;  // empty: none
  int token_embedding_dimension = 200;
  int token_lstm_dimension = 300;
  // [crf]
  bool using_crf = true;
  bool random_initial_transitions = true;
  // [training]
  double dropout = 0.5;
  int patience = 10;
  int maximum_number_of_epochs = 100;
  double maximum_training_time = 10.0;  // hours
  int number_of_cpu_threads = 8;

  // Also under [training].
  double learning_rate = 0.005;
  double gradient_clip = 5.0;  // 0 disables clipping
  TaggingFormat tagging_format = TaggingFormat::kBio;
  std::uint64_t seed = 42;
  bool vocab_only_embedded = false;
  std::filesystem::path output_folder = "output";
  std::string run_id;            // empty: timestamp
  bool log_elapsed_time = true;  // false writes 0 in the seconds column

  bool operator==(const Config&) const = default;
};

struct ConfigWarning {
  int line = 0;
  std::string message;
};

// Throws MissingRequiredKey, TypeError, RangeError.
Config parse_config(std::string_view text, std::vector<ConfigWarning>* warnings = nullptr);

// Reads the file and resolves relative paths against its directory.
Config load_config(const std::filesystem::path& path, std::vector<ConfigWarning>* warnings = nullptr);

// Applies one `key = value` override with the same typing rules.
void apply_config_value(Config& config, std::string_view key, std::string_view value);

// Canonical INI text; parse_config(to_ini(c)) == c.
std::string to_ini(const Config& config);

// Throws RangeError if any value is outside its domain.
void validate_config(const Config& config);

}  // namespace seqforge
