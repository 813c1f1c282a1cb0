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

#include <gtest/gtest.h>

#include "seqforge/utf8.hpp"
#include "support.hpp"

namespace seqforge {
namespace {

TEST(Utf8, DecodesMultibyteScalars) {
  const std::u32string cps = utf8::decode("aé日\U0001F600");
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[0], U'a');
  EXPECT_EQ(cps[1], U'é');
  EXPECT_EQ(cps[2], U'日');
  EXPECT_EQ(cps[3], U'\U0001F600');
}

TEST(Utf8, InvalidBytesBecomeReplacementCharacters) {
  const std::u32string cps = utf8::decode("a\xFF\xC3");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'�');
  EXPECT_EQ(cps[2], U'�');
  // Overlong encoding of '/' and an encoded surrogate are rejected.
  EXPECT_EQ(utf8::decode("\xC0\xAF"), std::u32string(2, U'�'));
  EXPECT_EQ(utf8::decode("\xED\xA0\x80"), std::u32string(3, U'�'));
}

TEST(Utf8, SliceUsesScalarOffsets) {
  EXPECT_EQ(utf8::slice("héllo wörld", 6, 11), "wörld");
  EXPECT_EQ(utf8::slice("abc", 1, 99), "bc");
  EXPECT_EQ(utf8::length("日本語"), 3u);
}

TEST(Utf8, StripsByteOrderMark) {
  EXPECT_EQ(utf8::strip_bom("\xEF\xBB\xBFtext"), "text");
  EXPECT_EQ(utf8::strip_bom("text"), "text");
}

TEST(Utf8, EncodeDecodeRoundTripProperty) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string cps;
    const std::size_t n = rng.index(0, 20);
    for (std::size_t i = 0; i < n; ++i) {
      char32_t c = 0;
      do {
        c = static_cast<char32_t>(rng.index(1, 0x10FFFF));
      } while (c >= 0xD800 && c <= 0xDFFF);
      cps.push_back(c);
    }
    const std::string bytes = utf8::encode(cps);
    ASSERT_EQ(utf8::decode(bytes), cps);
    ASSERT_EQ(utf8::length(bytes), cps.size());
  }
}

TEST(Utf8, CharacterClasses) {
  EXPECT_TRUE(utf8::is_space(U' '));
  EXPECT_TRUE(utf8::is_space(U' '));
  EXPECT_TRUE(utf8::is_upper(U'B'));
  EXPECT_TRUE(utf8::is_upper(U'É'));
  EXPECT_FALSE(utf8::is_upper(U'b'));
  EXPECT_TRUE(utf8::is_word_char(U'7'));
  EXPECT_TRUE(utf8::is_word_char(U'日'));
  EXPECT_FALSE(utf8::is_word_char(U','));
  EXPECT_FALSE(utf8::is_word_char(U'€'));
}

}  // namespace
}  // namespace seqforge
