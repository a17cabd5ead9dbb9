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

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tida/text.h"

namespace tida {

enum class Skill { kGender, kColor, kCounting };

inline constexpr std::array<Skill, 3> kAllSkills = {Skill::kGender, Skill::kColor,
                                                     Skill::kCounting};

// "gender", "color", "counting".
std::string_view SkillName(Skill skill);
// Three-letter tag used in manifest names: "gdr", "clr", "ctg".
std::string_view SkillTag(Skill skill);
// Accepts the full name or the tag; throws ConfigError otherwise.
Skill ParseSkill(std::string_view name);

// How a skill word is rewritten by the perturbers.
struct ReplacementRule {
  enum class Kind {
    kMap,   // fixed word -> alternatives table (gender)
    kSwap,  // any other member of the detect list (color)
    kStep,  // neighbour in an ordered sequence (counting)
  };
  Kind kind = Kind::kSwap;
  // kMap: source form -> candidate replacements. `forward` is the default
  // direction, `reverse` is only consulted in symmetric mode.
  std::map<std::string, std::vector<std::string>> forward;
  std::map<std::string, std::vector<std::string>> reverse;
  // kStep: ordered sequence, neighbours are one position apart.
  std::vector<std::string> sequence;
};

struct SkillEntry {
  std::vector<std::string> detect_words;
  ReplacementRule rule;
};

class SkillLexicon {
 public:
  // The built-in word lists: nine colors, one..six, and the male/female
  // forms with male -> female replacements.
  static SkillLexicon Default();

  // Reads overrides from JSON. Skills absent from the document keep their
  // default entries. Schema:
  //   {"split_hyphens": bool,
  //    "gender":   {"detect": [...], "forward": {w: [...]}, "reverse": {w: [...]}},
  //    "color":    {"detect": [...]},
  //    "counting": {"detect": [...], "sequence": [...]}}
  static SkillLexicon FromJson(const nlohmann::json& doc);
  static SkillLexicon Load(const std::filesystem::path& path);

  nlohmann::json ToJson() const;
  // SHA-256 of the canonical JSON dump; recorded in manifest headers.
  std::string Hash() const;

  const SkillEntry& entry(Skill skill) const { return entries_[Index(skill)]; }
  bool Contains(Skill skill, std::string_view lower_word) const;
  const TokenizerOptions& tokenizer_options() const { return tokenizer_options_; }

 private:
  SkillLexicon() = default;
  static std::size_t Index(Skill skill) { return static_cast<std::size_t>(skill); }
  void Validate() const;
  void RebuildIndex();

  std::array<SkillEntry, 3> entries_;
  std::array<std::unordered_set<std::string>, 3> lookup_;
  TokenizerOptions tokenizer_options_;
};

struct SkillSpan {
  std::size_t token_index = 0;
  std::string word;  // lowercase form that matched

  bool operator==(const SkillSpan&) const = default;
};

struct SkillMatch {
  Skill skill = Skill::kGender;
  std::vector<SkillSpan> spans;  // strictly increasing token_index

  bool fired() const { return !spans.empty(); }
};

// Whole-token, case-insensitive lexicon lookup ("manner" never matches "man").
SkillMatch Detect(std::string_view text, Skill skill, const SkillLexicon& lexicon);
SkillMatch Detect(std::span<const Token> tokens, Skill skill, const SkillLexicon& lexicon);

// True iff Detect fires on at least one caption. An empty list yields false.
bool ImageHasSkill(std::span<const std::string> captions, Skill skill,
                   const SkillLexicon& lexicon);

}  // namespace tida
