// Copyright 2026 The TIDA Authors.
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
#include <vector>

namespace tida {

struct Token {
  std::string surface;  // bytes as they appear in the source text
  std::string lower;    // case-folded shadow used for matching
  std::size_t begin = 0;  // byte offset of the first byte
  std::size_t end = 0;    // one past the last byte
};

struct TokenizerOptions {
  // "two-year-old" -> two / year / old when set; one token otherwise.
  bool split_hyphens = true;
};

// Splits UTF-8 text into word tokens. Whitespace and punctuation separate
// tokens and are never emitted. Letters, digits and combining marks of any
// script are word characters.
std::vector<Token> Tokenize(std::string_view text, const TokenizerOptions& options = {});

// Lowercased surface forms only.
std::vector<std::string> TokenizeLower(std::string_view text,
                                       const TokenizerOptions& options = {});

// NFC normalization followed by whitespace collapsing and trimming. Case is
// preserved.
std::string NormalizeCaption(std::string_view text);

std::string ToLowerUtf8(std::string_view text);

// Applies the capitalization pattern of `source` to `word`: an all-caps source
// (two or more letters) yields an all-caps word, a capitalized first letter
// yields a capitalized word, anything else leaves `word` untouched.
std::string MatchCase(std::string_view source, std::string_view word);

}  // namespace tida
