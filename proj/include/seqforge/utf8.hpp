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

#include <cstddef>
#include <string>
#include <string_view>

// Offsets throughout the project count Unicode scalar values. These helpers
// convert between UTF-8 storage and code point sequences. Invalid byte
// sequences decode to U+FFFD, one replacement per offending byte.
namespace seqforge::utf8 {

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view codepoints);
std::string encode(char32_t codepoint);

// Number of scalar values in `text`.
std::size_t length(std::string_view text);

// Substring [start, end) in scalar-value offsets. Clamps to the text length.
std::string slice(std::string_view text, std::size_t start, std::size_t end);

// Strips a leading UTF-8 byte-order mark if present.
std::string_view strip_bom(std::string_view text);

bool is_space(char32_t c);
bool is_upper(char32_t c);
// Letters and digits. Any non-ASCII scalar that is neither whitespace nor in
// a general-punctuation block counts as a letter.
bool is_word_char(char32_t c);

}  // namespace seqforge::utf8
