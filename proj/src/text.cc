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

#include "tida/text.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "tida/error.h"

namespace tida {
namespace {

bool IsWordChar(UChar32 c) {
  if (c < 0) return false;
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  }
  if (u_isalnum(c) || u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) return true;
  const int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

// Decodes the code point starting at `pos`, advancing it. Invalid sequences
// decode to a negative value and consume one byte.
UChar32 NextCodePoint(std::string_view text, std::size_t& pos) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  int32_t i = static_cast<int32_t>(pos);
  const auto length = static_cast<int32_t>(text.size());
  UChar32 c;
  U8_NEXT(bytes, i, length, c);
  pos = static_cast<std::size_t>(i);
  return c;
}

std::string MapCase(std::string_view text, bool upper) {
  std::string out;
  out.reserve(text.size());
  bool all_ascii = true;
  for (char ch : text) {
    if (static_cast<unsigned char>(ch) >= 0x80) {
      all_ascii = false;
      break;
    }
  }
  if (all_ascii) {
    for (char ch : text) {
      if (upper && ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
      if (!upper && ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      out.push_back(ch);
    }
    return out;
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (upper) {
    u.toUpper(icu::Locale::getRoot());
  } else {
    u.toLower(icu::Locale::getRoot());
  }
  u.toUTF8String(out);
  return out;
}

bool IsUpperLetter(UChar32 c) { return c >= 0 && u_isupper(c); }

}  // namespace

std::vector<Token> Tokenize(std::string_view text, const TokenizerOptions& options) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;

  auto flush = [&](std::size_t end) {
    if (start == std::string_view::npos) return;
    Token token;
    token.surface.assign(text.substr(start, end - start));
    token.lower = ToLowerUtf8(token.surface);
    token.begin = start;
    token.end = end;
    tokens.push_back(std::move(token));
    start = std::string_view::npos;
  };

  while (pos < text.size()) {
    const std::size_t here = pos;
    const UChar32 c = NextCodePoint(text, pos);
    if (IsWordChar(c)) {
      if (start == std::string_view::npos) start = here;
      continue;
    }
    // An unsplit hyphen joins two word characters into one token.
    if (c == '-' && !options.split_hyphens && start != std::string_view::npos &&
        pos < text.size()) {
      std::size_t peek = pos;
      if (IsWordChar(NextCodePoint(text, peek))) continue;
    }
    flush(here);
  }
  flush(text.size());
  return tokens;
}

std::vector<std::string> TokenizeLower(std::string_view text, const TokenizerOptions& options) {
  std::vector<std::string> out;
  for (auto& token : Tokenize(text, options)) out.push_back(std::move(token.lower));
  return out;
}

std::string NormalizeCaption(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw ParseError("caption is not valid UTF-8");
  std::string utf8;
  normalized.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const std::size_t here = pos;
    const UChar32 c = NextCodePoint(utf8, pos);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(utf8, here, pos - here);
  }
  return out;
}

std::string ToLowerUtf8(std::string_view text) { return MapCase(text, false); }

std::string MatchCase(std::string_view source, std::string_view word) {
  if (source.empty() || word.empty()) return std::string(word);
  std::size_t pos = 0;
  const UChar32 first = NextCodePoint(source, pos);
  if (!IsUpperLetter(first)) return std::string(word);

  bool all_upper = true;
  int letters = 0;
  pos = 0;
  while (pos < source.size()) {
    const UChar32 c = NextCodePoint(source, pos);
    if (c >= 0 && u_isalpha(c)) {
      ++letters;
      if (!u_isupper(c)) all_upper = false;
    }
  }
  if (all_upper && letters >= 2) return MapCase(word, true);

  std::size_t split = 0;
  NextCodePoint(word, split);
  return MapCase(word.substr(0, split), true) + std::string(word.substr(split));
}

}  // namespace tida
