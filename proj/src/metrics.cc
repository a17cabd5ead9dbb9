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

#include "tida/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tida/error.h"

namespace tida {
namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> CountNgrams(const std::vector<std::string>& tokens, int n) {
  std::map<Ngram, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

std::string Pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string Pct100(double v) { return Pct(v * 100.0); }

void CheckAligned(std::span<const ModelEvaluation> models) {
  for (const auto& m : models) {
    if (m.bleu.size() != models.front().bleu.size() ||
        m.skills.size() != models.front().skills.size()) {
      throw ConfigError("report: models disagree on test sets or skills");
    }
    for (std::size_t i = 0; i < m.bleu.size(); ++i) {
      if (m.bleu[i].first != models.front().bleu[i].first) {
        throw ConfigError("report: models disagree on test set order");
      }
    }
    for (std::size_t i = 0; i < m.skills.size(); ++i) {
      if (m.skills[i].first != models.front().skills[i].first) {
        throw ConfigError("report: models disagree on skill order");
      }
    }
  }
}

std::string EmitCsv(std::span<const ModelEvaluation> models) {
  std::ostringstream out;
  const auto& first = models.front();
  out << "model";
  for (const auto& [ts, _] : first.bleu) out << ',' << ts << "_bleu_avg";
  for (const auto& [ts, report] : first.bleu) {
    for (std::size_t n = 1; n <= report.bleu.size(); ++n) out << ',' << ts << "_bleu" << n;
    out << ',' << ts << "_bp";
  }
  for (const auto& [skill, _] : first.skills) {
    const std::string s(SkillName(skill));
    out << ',' << s << "_p_pos," << s << "_r_pos," << s << "_p_neg," << s << "_r_neg," << s
        << "_f1," << s << "_degenerate";
  }
  out << '\n';
  for (const auto& m : models) {
    out << m.name;
    for (const auto& [ts, report] : m.bleu) out << ',' << Pct100(report.avg_1_4);
    for (const auto& [ts, report] : m.bleu) {
      for (double b : report.bleu) out << ',' << Pct100(b);
      out << ',' << Pct100(report.brevity_penalty);
    }
    for (const auto& [skill, prf] : m.skills) {
      out << ',' << Pct(prf.p_pos) << ',' << Pct(prf.r_pos) << ',' << Pct(prf.p_neg) << ','
          << Pct(prf.r_neg) << ',' << Pct(prf.f1_macro) << ',' << (prf.degenerate ? "yes" : "no");
    }
    out << '\n';
  }
  return out.str();
}

std::string EmitMarkdown(std::span<const ModelEvaluation> models) {
  std::ostringstream out;
  const auto& first = models.front();
  bool any_degenerate = false;

  if (!first.bleu.empty()) {
    out << "### Average of BLEU@1-4 (x100)\n\n| Train |";
    for (const auto& [ts, _] : first.bleu) out << ' ' << ts << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < first.bleu.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& m : models) {
      out << "| " << m.name << " |";
      for (const auto& [ts, report] : m.bleu) out << ' ' << Pct100(report.avg_1_4) << " |";
      out << '\n';
    }

    out << "\n### BLEU@n (x100)\n\n| Train | Test | ";
    for (std::size_t n = 1; n <= first.bleu.front().second.bleu.size(); ++n) {
      out << "BLEU@" << n << " | ";
    }
    out << "BP |\n|---|---|";
    for (std::size_t n = 0; n <= first.bleu.front().second.bleu.size(); ++n) out << "---|";
    out << '\n';
    for (const auto& m : models) {
      for (const auto& [ts, report] : m.bleu) {
        out << "| " << m.name << " | " << ts << " |";
        for (double b : report.bleu) out << ' ' << Pct100(b) << " |";
        out << ' ' << Pct100(report.brevity_penalty) << " |\n";
      }
    }
  }

  if (!first.skills.empty()) {
    if (!first.bleu.empty()) out << '\n';
    out << "### Skill-related words (x100)\n\n| Train |";
    for (const auto& [skill, _] : first.skills) {
      const std::string s(SkillName(skill));
      out << ' ' << s << " P+ | " << s << " R+ | " << s << " P- | " << s << " R- | " << s
          << " F1 |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < first.skills.size() * 5; ++i) out << "---|";
    out << '\n';
    for (const auto& m : models) {
      out << "| " << m.name << " |";
      for (const auto& [skill, prf] : m.skills) {
        const char* mark = prf.degenerate ? "*" : "";
        any_degenerate = any_degenerate || prf.degenerate;
        out << ' ' << Pct(prf.p_pos) << " | " << Pct(prf.r_pos) << " | " << Pct(prf.p_neg)
            << " | " << Pct(prf.r_neg) << " | " << Pct(prf.f1_macro) << mark << " |";
      }
      out << '\n';
    }
    if (any_degenerate) out << "\n\\* a precision, recall or F1 had a zero denominator and was set to 0.\n";
  }
  return out.str();
}

}  // namespace

BleuReport BleuCorpus(std::span<const EvalPair> pairs, int max_n,
                      const TokenizerOptions& tokenizer) {
  if (pairs.empty()) throw ConfigError("BleuCorpus: no pairs");
  if (max_n < 1) throw ConfigError("BleuCorpus: max_n must be >= 1");

  BleuReport report;
  report.matches.assign(max_n, 0);
  report.totals.assign(max_n, 0);

  for (const auto& pair : pairs) {
    if (pair.references.empty()) {
      throw ConfigError("BleuCorpus: image '" + pair.image_id + "' has no references");
    }
    const auto cand = TokenizeLower(pair.candidate, tokenizer);
    std::vector<std::vector<std::string>> refs;
    refs.reserve(pair.references.size());
    for (const auto& r : pair.references) refs.push_back(TokenizeLower(r, tokenizer));

    report.candidate_length += cand.size();
    // Closest reference length; ties go to the shorter reference.
    std::size_t best = refs.front().size();
    for (const auto& r : refs) {
      const auto d = [&](std::size_t len) {
        return len > cand.size() ? len - cand.size() : cand.size() - len;
      };
      if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    report.effective_ref_length += best;

    for (int n = 1; n <= max_n; ++n) {
      const auto cand_counts = CountNgrams(cand, n);
      std::map<Ngram, std::size_t> max_ref;
      for (const auto& r : refs) {
        for (const auto& [gram, count] : CountNgrams(r, n)) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, count);
        }
      }
      for (const auto& [gram, count] : cand_counts) {
        report.totals[n - 1] += count;
        if (auto it = max_ref.find(gram); it != max_ref.end()) {
          report.matches[n - 1] += std::min(count, it->second);
        }
      }
    }
  }

  const double c = static_cast<double>(report.candidate_length);
  const double r = static_cast<double>(report.effective_ref_length);
  if (report.candidate_length == 0) {
    report.brevity_penalty = 0.0;
  } else {
    report.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
  }

  report.bleu.assign(max_n, 0.0);
  double log_sum = 0.0;
  bool zero = report.candidate_length == 0;
  for (int n = 1; n <= max_n; ++n) {
    if (report.matches[n - 1] == 0) zero = true;
    if (!zero) {
      log_sum += std::log(static_cast<double>(report.matches[n - 1]) /
                          static_cast<double>(report.totals[n - 1]));
    }
    report.bleu[n - 1] = zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / n);
  }
  double sum = 0.0;
  const int avg_over = std::min(max_n, 4);
  for (int n = 0; n < avg_over; ++n) sum += report.bleu[n];
  report.avg_1_4 = sum / avg_over;
  return report;
}

ConfusionCounts SkillConfusion(std::span<const EvalPair> pairs, Skill skill,
                               const SkillLexicon& lexicon) {
  ConfusionCounts counts;
  counts.skill = skill;
  for (const auto& pair : pairs) {
    const bool predicted = Detect(pair.candidate, skill, lexicon).fired();
    const bool truth = ImageHasSkill(pair.references, skill, lexicon);
    if (predicted && truth) {
      ++counts.tp;
    } else if (predicted) {
      ++counts.fp;
    } else if (truth) {
      ++counts.fn;
    } else {
      ++counts.tn;
    }
  }
  return counts;
}

double HarmonicMean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

SkillPRF SkillPrfFromRates(double p_pos, double r_pos, double p_neg, double r_neg) {
  SkillPRF out;
  out.p_pos = p_pos;
  out.r_pos = r_pos;
  out.p_neg = p_neg;
  out.r_neg = r_neg;
  out.f1_pos = HarmonicMean(p_pos, r_pos);
  out.f1_neg = HarmonicMean(p_neg, r_neg);
  out.f1_macro = (out.f1_pos + out.f1_neg) / 2.0;
  out.degenerate = p_pos + r_pos == 0.0 || p_neg + r_neg == 0.0;
  return out;
}

SkillPRF SkillPrf(const ConfusionCounts& c) {
  bool degenerate = false;
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      degenerate = true;
      return 0.0;
    }
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  const double p_pos = ratio(c.tp, c.tp + c.fp);
  const double r_pos = ratio(c.tp, c.tp + c.fn);
  const double p_neg = ratio(c.tn, c.tn + c.fn);
  const double r_neg = ratio(c.tn, c.tn + c.fp);
  SkillPRF out = SkillPrfFromRates(p_pos, r_pos, p_neg, r_neg);
  out.degenerate = out.degenerate || degenerate;
  return out;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string EmitReport(std::span<const ModelEvaluation> models, ReportFormat format) {
  if (models.empty()) return {};
  CheckAligned(models);
  return format == ReportFormat::kCsv ? EmitCsv(models) : EmitMarkdown(models);
}

}  // namespace tida
