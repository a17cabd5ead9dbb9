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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tida/skills.h"

namespace tida {

struct Substitution {
  std::size_t token_index = 0;
  std::string old_word;  // surface form in the original caption
  std::string new_word;  // surface form written into the perturbed caption

  bool operator==(const Substitution&) const = default;
};

struct PerturbedCaption {
  std::string original;
  std::string perturbed;
  Skill skill = Skill::kGender;
  std::vector<Substitution> substitutions;
  uint64_t seed = 0;

  bool operator==(const PerturbedCaption&) const = default;
};

struct PerturbOptions {
  // Rewrite every eligible token; only the first one otherwise.
  bool replace_all = true;
  // Also rewrite female forms using the lexicon's reverse table.
  bool symmetric_gender = false;
};

// man->woman, men->women, boy->girl, boys->girls; guy and guys draw from
// {girl, woman} and {girls, women}. Capitalization follows the source token.
PerturbedCaption PerturbGender(std::string_view text, const SkillLexicon& lexicon, uint64_t seed,
                               const PerturbOptions& options = {});

// Each color word becomes a different color drawn uniformly from the lexicon.
PerturbedCaption PerturbColor(std::string_view text, const SkillLexicon& lexicon, uint64_t seed,
                              const PerturbOptions& options = {});

// Each number word moves one step up or down; a coin picks the direction and
// the ends of the sequence force the only legal move.
PerturbedCaption PerturbCounting(std::string_view text, const SkillLexicon& lexicon,
                                 uint64_t seed, const PerturbOptions& options = {});

PerturbedCaption Perturb(std::string_view text, Skill skill, const SkillLexicon& lexicon,
                         uint64_t seed, const PerturbOptions& options = {});

// True when Perturb would succeed (at least one rewritable token).
bool CanPerturb(std::string_view text, Skill skill, const SkillLexicon& lexicon,
                const PerturbOptions& options = {});

}  // namespace tida
