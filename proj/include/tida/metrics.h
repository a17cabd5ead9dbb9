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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tida/skills.h"
#include "tida/text.h"

namespace tida {

struct EvalPair {
  std::string image_id;
  std::string candidate;
  std::vector<std::string> references;  // at least one
};

struct BleuReport {
  // bleu[n - 1] is cumulative BLEU@n in [0, 1].
  std::vector<double> bleu;
  double avg_1_4 = 0.0;  // mean of the cumulative scores
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t effective_ref_length = 0;
  // Clipped matches and candidate n-gram totals per order.
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
};

// Corpus BLEU: clipped n-gram counts pooled over all pairs, closest reference
// length (shorter wins ties) summed into r, BP = exp(1 - r/c) when c < r,
// uniform weights, no smoothing. An order with zero matches scores 0.
BleuReport BleuCorpus(std::span<const EvalPair> pairs, int max_n = 4,
                      const TokenizerOptions& tokenizer = {});

struct ConfusionCounts {
  Skill skill = Skill::kGender;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Positive prediction: the candidate uses a skill word. Positive truth: any
// reference uses one.
ConfusionCounts SkillConfusion(std::span<const EvalPair> pairs, Skill skill,
                               const SkillLexicon& lexicon);

// Percentages in [0, 100].
struct SkillPRF {
  double p_pos = 0, r_pos = 0, p_neg = 0, r_neg = 0;
  double f1_pos = 0, f1_neg = 0, f1_macro = 0;
  // Some ratio, or an F1, had a zero denominator and was set to 0.
  bool degenerate = false;
};

SkillPRF SkillPrf(const ConfusionCounts& counts);

// The same aggregation starting from already-computed precisions and recalls
// (percentages), as published tables report them.
SkillPRF SkillPrfFromRates(double p_pos, double r_pos, double p_neg, double r_neg);

double HarmonicMean(double a, double b);

struct ModelEvaluation {
  std::string name;
  std::vector<std::pair<std::string, BleuReport>> bleu;  // per test set, in column order
  std::vector<std::pair<Skill, SkillPRF>> skills;
};

enum class ReportFormat { kCsv, kMarkdown };

ReportFormat ParseReportFormat(std::string_view name);

// Renders one row per model. Scores are multiplied by 100 and printed with
// one decimal. All models must share the same test sets and skills.
std::string EmitReport(std::span<const ModelEvaluation> models, ReportFormat format);

}  // namespace tida
