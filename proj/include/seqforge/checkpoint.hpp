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
#include <optional>
#include <string>
#include <string_view>

#include "seqforge/config.hpp"
#include "seqforge/embeddings.hpp"
#include "seqforge/model.hpp"

namespace seqforge {

// Binary container, all integers little-endian:
//   "SQFGCKPT" u32:version
//   str:config-ini  u64*7 + u8*2:architecture
//   3 x (u64:count, count x str):tokens, chars, labels
//   u64:tensor-count, per tensor str:name u64:rows u64:cols f32[rows*cols]
//   "ENDCKPT!"
// where str is u64:length followed by UTF-8 bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
  Config config;
};

std::string serialize_model(const ModelParams& params, const Vocabulary& vocab,
                            const Config& config);

// Throws CorruptCheckpoint, VersionMismatch, or ShapeMismatch when
// `expected` is given and differs from the stored architecture.
Checkpoint deserialize_model(std::string_view bytes,
                             const std::optional<Architecture>& expected = std::nullopt);

void save_model(const ModelParams& params, const Vocabulary& vocab, const Config& config,
                const std::filesystem::path& path);
Checkpoint load_model(const std::filesystem::path& path,
                      const std::optional<Architecture>& expected = std::nullopt);

}  // namespace seqforge
