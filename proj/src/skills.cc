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

#include "tida/skills.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "tida/error.h"
#include "tida/sha256.h"

namespace tida {
namespace {

using Words = std::vector<std::string>;

Words ReadWords(const nlohmann::json& node, std::string_view where) {
  if (!node.is_array()) throw ConfigError("lexicon: '" + std::string(where) + "' must be an array");
  Words out;
  for (const auto& item : node) {
    if (!item.is_string()) {
      throw ConfigError("lexicon: '" + std::string(where) + "' must contain strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::map<std::string, Words> ReadTable(const nlohmann::json& node, std::string_view where) {
  if (!node.is_object()) throw ConfigError("lexicon: '" + std::string(where) + "' must be an object");
  std::map<std::string, Words> out;
  for (const auto& [key, value] : node.items()) out[key] = ReadWords(value, where);
  return out;
}

void CheckWordList(const Words& words, std::string_view where) {
  std::set<std::string> seen;
  for (const auto& w : words) {
    if (w.empty()) throw ConfigError("lexicon: empty word in " + std::string(where));
    if (ToLowerUtf8(w) != w) {
      throw ConfigError("lexicon: '" + w + "' in " + std::string(where) + " is not lowercase");
    }
    if (!seen.insert(w).second) {
      throw ConfigError("lexicon: duplicate word '" + w + "' in " + std::string(where));
    }
    if (Tokenize(w).size() != 1) {
      throw ConfigError("lexicon: '" + w + "' in " + std::string(where) + " is not a single token");
    }
  }
}

}  // namespace

std::string_view SkillName(Skill skill) {
  switch (skill) {
    case Skill::kGender: return "gender";
    case Skill::kColor: return "color";
    case Skill::kCounting: return "counting";
  }
  return "unknown";
}

std::string_view SkillTag(Skill skill) {
  switch (skill) {
    case Skill::kGender: return "gdr";
    case Skill::kColor: return "clr";
    case Skill::kCounting: return "ctg";
  }
  return "unk";
}

Skill ParseSkill(std::string_view name) {
  for (Skill s : kAllSkills) {
    if (name == SkillName(s) || name == SkillTag(s)) return s;
  }
  throw ConfigError("unknown skill '" + std::string(name) + "'");
}

SkillLexicon SkillLexicon::Default() {
  SkillLexicon lex;

  auto& gender = lex.entries_[Index(Skill::kGender)];
  gender.detect_words = {"boy", "boys", "man", "men", "guy", "guys",
                         "girl", "girls", "woman", "women"};
  gender.rule.kind = ReplacementRule::Kind::kMap;
  gender.rule.forward = {{"boy", {"girl"}},
                         {"boys", {"girls"}},
                         {"man", {"woman"}},
                         {"men", {"women"}},
                         {"guy", {"girl", "woman"}},
                         {"guys", {"girls", "women"}}};
  gender.rule.reverse = {{"girl", {"boy"}},
                         {"girls", {"boys"}},
                         {"woman", {"man"}},
                         {"women", {"men"}}};

  auto& color = lex.entries_[Index(Skill::kColor)];
  color.detect_words = {"blue", "brown", "green", "grey", "orange",
                        "pink", "purple", "red", "yellow"};
  color.rule.kind = ReplacementRule::Kind::kSwap;

  auto& counting = lex.entries_[Index(Skill::kCounting)];
  counting.detect_words = {"one", "two", "three", "four", "five", "six"};
  counting.rule.kind = ReplacementRule::Kind::kStep;
  counting.rule.sequence = counting.detect_words;

  lex.Validate();
  lex.RebuildIndex();
  return lex;
}

SkillLexicon SkillLexicon::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("lexicon: top level must be an object");
  SkillLexicon lex = Default();
  if (doc.contains("split_hyphens")) {
    lex.tokenizer_options_.split_hyphens = doc.at("split_hyphens").get<bool>();
  }
  for (Skill skill : kAllSkills) {
    const std::string name(SkillName(skill));
    if (!doc.contains(name)) continue;
    const auto& node = doc.at(name);
    auto& entry = lex.entries_[Index(skill)];
    if (node.contains("detect")) entry.detect_words = ReadWords(node.at("detect"), name + ".detect");
    switch (entry.rule.kind) {
      case ReplacementRule::Kind::kMap:
        if (node.contains("forward")) entry.rule.forward = ReadTable(node.at("forward"), name + ".forward");
        if (node.contains("reverse")) entry.rule.reverse = ReadTable(node.at("reverse"), name + ".reverse");
        break;
      case ReplacementRule::Kind::kStep:
        entry.rule.sequence = node.contains("sequence")
                                  ? ReadWords(node.at("sequence"), name + ".sequence")
                                  : entry.detect_words;
        break;
      case ReplacementRule::Kind::kSwap:
        break;
    }
  }
  lex.Validate();
  lex.RebuildIndex();
  return lex;
}

SkillLexicon SkillLexicon::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open lexicon file '" + path.string() + "'");
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("lexicon '" + path.string() + "': " + e.what(),
                     e.byte > 0 ? e.byte - 1 : 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("lexicon '" + path.string() + "': " + e.what());
  }
}

nlohmann::json SkillLexicon::ToJson() const {
  nlohmann::json doc;
  doc["split_hyphens"] = tokenizer_options_.split_hyphens;
  for (Skill skill : kAllSkills) {
    const auto& entry = entries_[Index(skill)];
    nlohmann::json node;
    node["detect"] = entry.detect_words;
    switch (entry.rule.kind) {
      case ReplacementRule::Kind::kMap:
        node["forward"] = entry.rule.forward;
        node["reverse"] = entry.rule.reverse;
        break;
      case ReplacementRule::Kind::kStep:
        node["sequence"] = entry.rule.sequence;
        break;
      case ReplacementRule::Kind::kSwap:
        break;
    }
    doc[std::string(SkillName(skill))] = std::move(node);
  }
  return doc;
}

std::string SkillLexicon::Hash() const { return Sha256Hex(ToJson().dump()); }

bool SkillLexicon::Contains(Skill skill, std::string_view lower_word) const {
  return lookup_[Index(skill)].contains(std::string(lower_word));
}

void SkillLexicon::Validate() const {
  for (Skill skill : kAllSkills) {
    const std::string name(SkillName(skill));
    const auto& entry = entries_[Index(skill)];
    if (entry.detect_words.empty()) throw ConfigError("lexicon: " + name + " has no detect words");
    CheckWordList(entry.detect_words, name + ".detect");
    const std::set<std::string> detect(entry.detect_words.begin(), entry.detect_words.end());
    auto require_known = [&](const std::string& w, std::string_view where) {
      if (!detect.contains(w)) {
        throw ConfigError("lexicon: '" + w + "' in " + name + "." + std::string(where) +
                          " is not a detect word");
      }
    };
    switch (entry.rule.kind) {
      case ReplacementRule::Kind::kMap:
        if (entry.rule.forward.empty()) throw ConfigError("lexicon: " + name + ".forward is empty");
        for (const auto* table : {&entry.rule.forward, &entry.rule.reverse}) {
          for (const auto& [from, to] : *table) {
            require_known(from, "replacements");
            if (to.empty()) throw ConfigError("lexicon: no replacement for '" + from + "'");
            CheckWordList(to, name + ".replacements");
            for (const auto& w : to) {
              require_known(w, "replacements");
              if (w == from) throw ConfigError("lexicon: '" + from + "' maps to itself");
            }
          }
        }
        break;
      case ReplacementRule::Kind::kSwap:
        if (entry.detect_words.size() < 2) {
          throw ConfigError("lexicon: " + name + " needs at least two words to swap");
        }
        break;
      case ReplacementRule::Kind::kStep:
        if (entry.rule.sequence.size() < 2) {
          throw ConfigError("lexicon: " + name + ".sequence needs at least two words");
        }
        CheckWordList(entry.rule.sequence, name + ".sequence");
        for (const auto& w : entry.rule.sequence) require_known(w, "sequence");
        break;
    }
  }
}

void SkillLexicon::RebuildIndex() {
  for (Skill skill : kAllSkills) {
    const auto& words = entries_[Index(skill)].detect_words;
    lookup_[Index(skill)] = std::unordered_set<std::string>(words.begin(), words.end());
  }
}

SkillMatch Detect(std::span<const Token> tokens, Skill skill, const SkillLexicon& lexicon) {
  SkillMatch match;
  match.skill = skill;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (lexicon.Contains(skill, tokens[i].lower)) match.spans.push_back({i, tokens[i].lower});
  }
  return match;
}

SkillMatch Detect(std::string_view text, Skill skill, const SkillLexicon& lexicon) {
  const auto tokens = Tokenize(text, lexicon.tokenizer_options());
  return Detect(std::span<const Token>(tokens), skill, lexicon);
}

bool ImageHasSkill(std::span<const std::string> captions, Skill skill,
                   const SkillLexicon& lexicon) {
  return std::any_of(captions.begin(), captions.end(), [&](const std::string& caption) {
    return Detect(caption, skill, lexicon).fired();
  });
}

}  // namespace tida
