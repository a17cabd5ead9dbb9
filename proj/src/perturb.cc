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

#include "tida/perturb.h"

#include <algorithm>

#include "tida/error.h"
#include "tida/random.h"
#include "tida/text.h"

namespace tida {
namespace {

using Kind = ReplacementRule::Kind;

// Looks up the candidates for a kMap rule, honouring the direction setting.
const std::vector<std::string>* MapCandidates(const ReplacementRule& rule, const std::string& word,
                                              const PerturbOptions& options) {
  if (auto it = rule.forward.find(word); it != rule.forward.end()) return &it->second;
  if (options.symmetric_gender) {
    if (auto it = rule.reverse.find(word); it != rule.reverse.end()) return &it->second;
  }
  return nullptr;
}

bool Eligible(const SkillEntry& entry, const std::string& lower, const PerturbOptions& options) {
  switch (entry.rule.kind) {
    case Kind::kMap:
      return MapCandidates(entry.rule, lower, options) != nullptr;
    case Kind::kSwap:
      return true;
    case Kind::kStep:
      return std::find(entry.rule.sequence.begin(), entry.rule.sequence.end(), lower) !=
             entry.rule.sequence.end();
  }
  return false;
}

std::string Replacement(const SkillEntry& entry, const std::string& lower,
                        const PerturbOptions& options, Rng& rng) {
  switch (entry.rule.kind) {
    case Kind::kMap: {
      const auto& candidates = *MapCandidates(entry.rule, lower, options);
      return candidates.size() == 1 ? candidates.front()
                                    : candidates[rng.UniformIndex(candidates.size())];
    }
    case Kind::kSwap: {
      std::vector<std::string> pool;
      for (const auto& w : entry.detect_words) {
        if (w != lower) pool.push_back(w);
      }
      return pool[rng.UniformIndex(pool.size())];
    }
    case Kind::kStep: {
      const auto& seq = entry.rule.sequence;
      const auto pos = static_cast<std::size_t>(std::find(seq.begin(), seq.end(), lower) -
                                                seq.begin());
      const bool up = rng.Coin();
      if (pos == 0) return seq[1];
      if (pos + 1 == seq.size()) return seq[pos - 1];
      return up ? seq[pos + 1] : seq[pos - 1];
    }
  }
  return lower;
}

PerturbedCaption PerturbWith(std::string_view text, Skill skill, const SkillLexicon& lexicon,
                             uint64_t seed, const PerturbOptions& options) {
  const auto tokens = Tokenize(text, lexicon.tokenizer_options());
  const SkillEntry& entry = lexicon.entry(skill);
  const SkillMatch match = Detect(std::span<const Token>(tokens), skill, lexicon);

  PerturbedCaption result;
  result.original = std::string(text);
  result.skill = skill;
  result.seed = seed;

  Rng rng(seed);
  for (const auto& span : match.spans) {
    if (!Eligible(entry, span.word, options)) continue;
    const Token& token = tokens[span.token_index];
    const std::string replacement = Replacement(entry, span.word, options, rng);
    result.substitutions.push_back(
        {span.token_index, token.surface, MatchCase(token.surface, replacement)});
    if (!options.replace_all) break;
  }
  if (result.substitutions.empty()) {
    throw NoEligibleToken("no " + std::string(SkillName(skill)) + " word to perturb in \"" +
                          std::string(text) + "\"");
  }

  std::string out;
  std::size_t cursor = 0;
  for (const auto& sub : result.substitutions) {
    const Token& token = tokens[sub.token_index];
    out.append(text.substr(cursor, token.begin - cursor));
    out.append(sub.new_word);
    cursor = token.end;
  }
  out.append(text.substr(cursor));
  result.perturbed = std::move(out);
  return result;
}

}  // namespace

PerturbedCaption PerturbGender(std::string_view text, const SkillLexicon& lexicon, uint64_t seed,
                               const PerturbOptions& options) {
  return PerturbWith(text, Skill::kGender, lexicon, seed, options);
}

PerturbedCaption PerturbColor(std::string_view text, const SkillLexicon& lexicon, uint64_t seed,
                              const PerturbOptions& options) {
  return PerturbWith(text, Skill::kColor, lexicon, seed, options);
}

PerturbedCaption PerturbCounting(std::string_view text, const SkillLexicon& lexicon,
                                 uint64_t seed, const PerturbOptions& options) {
  return PerturbWith(text, Skill::kCounting, lexicon, seed, options);
}

PerturbedCaption Perturb(std::string_view text, Skill skill, const SkillLexicon& lexicon,
                         uint64_t seed, const PerturbOptions& options) {
  switch (skill) {
    case Skill::kGender: return PerturbGender(text, lexicon, seed, options);
    case Skill::kColor: return PerturbColor(text, lexicon, seed, options);
    case Skill::kCounting: return PerturbCounting(text, lexicon, seed, options);
  }
  throw ConfigError("unknown skill");
}

bool CanPerturb(std::string_view text, Skill skill, const SkillLexicon& lexicon,
                const PerturbOptions& options) {
  const SkillEntry& entry = lexicon.entry(skill);
  const SkillMatch match = Detect(text, skill, lexicon);
  return std::any_of(match.spans.begin(), match.spans.end(),
                     [&](const SkillSpan& s) { return Eligible(entry, s.word, options); });
}

}  // namespace tida
