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

#include "seqforge/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "seqforge/error.hpp"
#include "seqforge/format_io.hpp"

namespace seqforge {
namespace {

constexpr std::string_view kMagic = "SQFGCKPT";
constexpr std::string_view kTrailer = "ENDCKPT!";

class Writer {
 public:
  void raw(std::string_view bytes) { out_ += bytes; }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    raw(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view raw(std::size_t n) {
    need(n);
    std::string_view s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(raw(1)[0]); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const std::uint64_t n = u64();
    return std::string(raw(n));
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_arch(Writer& w, const Architecture& a) {
  w.u64(a.char_vocab);
  w.u64(a.char_embedding);
  w.u64(a.char_hidden);
  w.u64(a.token_vocab);
  w.u64(a.token_embedding);
  w.u64(a.token_hidden);
  w.u64(a.num_labels);
  w.u8(a.using_char_lstm ? 1 : 0);
  w.u8(a.using_crf ? 1 : 0);
}

Architecture read_arch(Reader& r) {
  Architecture a;
  a.char_vocab = r.u64();
  a.char_embedding = r.u64();
  a.char_hidden = r.u64();
  a.token_vocab = r.u64();
  a.token_embedding = r.u64();
  a.token_hidden = r.u64();
  a.num_labels = r.u64();
  a.using_char_lstm = r.u8() != 0;
  a.using_crf = r.u8() != 0;
  return a;
}

std::vector<std::string> read_strings(Reader& r) {
  const std::uint64_t n = r.u64();
  std::vector<std::string> out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(r.str());
  return out;
}

void write_strings(Writer& w, const std::vector<std::string>& items) {
  w.u64(items.size());
  for (const auto& s : items) w.str(s);
}

std::string describe(const Architecture& a) {
  return "chars=" + std::to_string(a.char_vocab) + "x" + std::to_string(a.char_embedding) +
         " char_hidden=" + std::to_string(a.char_hidden) + " tokens=" +
         std::to_string(a.token_vocab) + "x" + std::to_string(a.token_embedding) +
         " token_hidden=" + std::to_string(a.token_hidden) + " labels=" +
         std::to_string(a.num_labels);
}

// Shapes the architecture implies, via a zero-initialized parameter set.
ModelParams shaped_params(const Architecture& a) {
  ModelParams p;
  p.arch = a;
  p.char_embeddings = Matrix(a.char_vocab, a.char_embedding);
  p.char_forward = LstmWeights::zeros(a.char_embedding, a.char_hidden);
  p.char_backward = LstmWeights::zeros(a.char_embedding, a.char_hidden);
  p.token_embeddings = Matrix(a.token_vocab, a.token_embedding);
  p.token_forward = LstmWeights::zeros(a.token_input(), a.token_hidden);
  p.token_backward = LstmWeights::zeros(a.token_input(), a.token_hidden);
  p.projection = Matrix(2 * a.token_hidden, a.num_labels);
  p.projection_bias.assign(a.num_labels, 0.0);
  p.transitions = Matrix(a.num_labels + 2, a.num_labels + 2);
  return p;
}

}  // namespace

std::string serialize_model(const ModelParams& params, const Vocabulary& vocab,
                            const Config& config) {
  Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.str(to_ini(config));
  write_arch(w, params.arch);
  write_strings(w, vocab.tokens());
  write_strings(w, vocab.chars());
  write_strings(w, vocab.labels());
  const auto tensors = named_tensors(params);
  w.u64(tensors.size());
  for (const auto& t : tensors) {
    w.str(t.name);
    w.u64(t.rows);
    w.u64(t.cols);
    for (double v : t.data) w.f32(static_cast<float>(v));
  }
  w.raw(kTrailer);
  return w.take();
}

Checkpoint deserialize_model(std::string_view bytes, const std::optional<Architecture>& expected) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kCorruptCheckpoint, "not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                 ", expected " +
                                                 std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  try {
    ck.config = parse_config(r.str());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptCheckpoint) throw;
    throw Error(ErrorCode::kCorruptCheckpoint, std::string("embedded config: ") + e.what());
  }
  const Architecture arch = read_arch(r);
  std::vector<std::string> tokens = read_strings(r);
  std::vector<std::string> chars = read_strings(r);
  std::vector<std::string> labels = read_strings(r);
  if (tokens.size() != arch.token_vocab || labels.size() != arch.num_labels ||
      (arch.using_char_lstm && chars.size() != arch.char_vocab)) {
    throw Error(ErrorCode::kCorruptCheckpoint, "vocabulary sizes disagree with architecture");
  }
  ck.vocab = Vocabulary(std::move(tokens), std::move(chars), std::move(labels));

  if (expected && !(*expected == arch)) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint architecture (" + describe(arch) +
                                               ") differs from expected (" + describe(*expected) +
                                               ")");
  }

  ck.params = shaped_params(arch);
  auto slots = named_tensors(ck.params);
  const std::uint64_t count = r.u64();
  if (count != slots.size()) {
    throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint holds " + std::to_string(count) +
                                                   " tensors, expected " +
                                                   std::to_string(slots.size()));
  }
  for (auto& slot : slots) {
    const std::string name = r.str();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (name != slot.name) {
      throw Error(ErrorCode::kCorruptCheckpoint, "tensor '" + name + "' where '" + slot.name +
                                                     "' was expected");
    }
    if (rows != slot.rows || cols != slot.cols) {
      throw Error(ErrorCode::kShapeMismatch, "tensor '" + name + "' has shape " +
                                                 std::to_string(rows) + "x" + std::to_string(cols) +
                                                 ", expected " + std::to_string(slot.rows) + "x" +
                                                 std::to_string(slot.cols));
    }
    for (double& v : slot.data) v = static_cast<double>(r.f32());
  }
  if (r.raw(kTrailer.size()) != kTrailer || !r.at_end()) {
    throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint trailer missing or trailing bytes");
  }
  return ck;
}

void save_model(const ModelParams& params, const Vocabulary& vocab, const Config& config,
                const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, serialize_model(params, vocab, config));
}

Checkpoint load_model(const std::filesystem::path& path,
                      const std::optional<Architecture>& expected) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kCorruptCheckpoint, "cannot read checkpoint " + path.string());
  }
  return deserialize_model(bytes, expected);
}

}  // namespace seqforge
