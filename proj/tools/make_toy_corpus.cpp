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

// Writes the bundled toy corpus: make_toy_corpus <out-dir>
//
// Sentences come from five fixed templates filled with a small closed set
// of names, so a model can fit the training split exactly and the other
// splits reuse the same entity strings in new combinations.

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "seqforge/corpus.hpp"
#include "seqforge/format_io.hpp"
#include "seqforge/utf8.hpp"

namespace fs = std::filesystem;
using namespace seqforge;

namespace {

const std::array<const char*, 5> kPeople = {"Alice Brown", "John Smith", "Maria Garcia",
                                            "Wei Chen", "Omar Haddad"};
const std::array<const char*, 4> kOrgs = {"Acme Corp", "Globex", "Initech",
                                          "Vandelay Industries"};
const std::array<const char*, 5> kPlaces = {"Paris", "Berlin", "New York", "Tokyo", "Lagos"};

// Template pieces: literal text or a slot "@PER", "@ORG", "@LOC".
const std::array<std::vector<const char*>, 5> kTemplates = {{
    {"@PER", " works for ", "@ORG", " in ", "@LOC", " ."},
    {"@PER", " visited ", "@LOC", " last week ."},
    {"@ORG", " opened an office in ", "@LOC", " ."},
    {"Yesterday ", "@PER", " met ", "@PER", " at ", "@ORG", " ."},
    {"The mayor of ", "@LOC", " praised ", "@ORG", " ."},
}};

struct Builder {
  Document doc;
  std::size_t next_id = 1;

  void sentence(std::size_t index, std::size_t offset) {
    const auto& parts = kTemplates[index % kTemplates.size()];
    const std::size_t cycle = index / kTemplates.size();
    std::size_t slot = 0;
    for (const char* part : parts) {
      const std::string piece = part;
      std::string category;
      std::string surface;
      if (piece == "@PER") {
        category = "PER";
        surface = kPeople[(index + cycle + offset + 2 * slot) % kPeople.size()];
      } else if (piece == "@ORG") {
        category = "ORG";
        surface = kOrgs[(index + 2 * cycle + offset + slot) % kOrgs.size()];
      } else if (piece == "@LOC") {
        category = "LOC";
        surface = kPlaces[(2 * index + cycle + offset + slot) % kPlaces.size()];
      }
      if (category.empty()) {
        doc.text += piece;
        continue;
      }
      const std::size_t start = utf8::length(doc.text);
      doc.text += surface;
      doc.spans.push_back({"T" + std::to_string(next_id++), category, start,
                           utf8::length(doc.text), surface});
      ++slot;
    }
    doc.text += "\n";
  }
};

void write_split(const fs::path& dir, const std::string& prefix, std::size_t docs,
                 std::size_t per_doc, std::size_t first, std::size_t offset, bool with_ann) {
  fs::create_directories(dir);
  for (std::size_t d = 0; d < docs; ++d) {
    Builder b;
    b.doc.id = prefix + std::to_string(d + 1);
    for (std::size_t s = 0; s < per_doc; ++s) b.sentence(first + d * per_doc + s, offset);
    if (with_ann) {
      write_brat_document(dir, b.doc);
    } else {
      write_file_atomic(dir / (b.doc.id + ".txt"), b.doc.text);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_toy_corpus <out-dir>\n");
    return 2;
  }
  const fs::path root = argv[1];
  write_split(root / "train", "train", 4, 5, 0, 0, true);
  write_split(root / "valid", "valid", 2, 5, 0, 1, true);
  write_split(root / "test", "test", 2, 5, 0, 2, true);
  write_split(root / "deploy", "deploy", 2, 3, 0, 3, false);
  return 0;
}
