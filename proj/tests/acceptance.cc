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

// Acceptance checks. Each criterion prints one line:
//   criterion <n> <name>: PASS|FAIL <detail> [<seconds>s, limit <limit>s]
// The process exits 0 only when every selected criterion passes.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "cli.h"
#include "support/oracles.h"
#include "support/published_rates.h"
#include "support/synthetic_embeddings.h"
#include "support/test_support.h"
#include "tida/augment.h"
#include "tida/corpus.h"
#include "tida/error.h"
#include "tida/metrics.h"
#include "tida/perturb.h"
#include "tida/probe.h"
#include "tida/random.h"
#include "tida/text.h"

namespace tida {
namespace {

namespace fs = std::filesystem;

constexpr double kF1Tolerance = 0.05;
constexpr double kBleuTolerance = 1e-9;
constexpr double kGradientRelTolerance = 1e-4;
constexpr double kProbeMinF1 = 99.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; only the first eight are spelled out.
  void Fail(const std::string& what) {
    if (failures_++ < 8) detail << (pass ? "" : "; ") << what;
    pass = false;
  }
  std::size_t failures() const { return failures_; }

 private:
  std::size_t failures_ = 0;
};

const SkillLexicon& Lex() {
  static const SkillLexicon lex = SkillLexicon::Default();
  return lex;
}

// ---- 1 --------------------------------------------------------------------

void PublishedAggregation(Outcome& o) {
  std::size_t checked = 0;
  std::map<std::string, std::size_t> rows;
  for (const auto& row : testing::PublishedRows()) {
    ++rows[row.table];
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& r = row.skills[s];
      const double f1 = SkillPrfFromRates(r.p_pos, r.r_pos, r.p_neg, r.r_neg).f1_macro;
      ++checked;
      if (std::abs(f1 - r.f1) > kF1Tolerance) {
        std::ostringstream m;
        m.precision(2);
        m << std::fixed << row.table << "/" << row.model << "/"
          << testing::PublishedSkillName(s) << " got " << f1 << " published " << r.f1;
        o.Fail(m.str());
      }
    }
  }
  const std::string summary = std::to_string(checked - o.failures()) + "/" +
                              std::to_string(checked) + " F1 within 0.05 (" +
                              std::to_string(rows["targeted"]) + " targeted rows, " +
                              std::to_string(rows["variants"]) + " variant rows)";
  o.detail.str(summary + (o.pass ? "" : "; " + o.detail.str()));
}

// ---- 2 --------------------------------------------------------------------

std::string RandomSentence(Rng& rng, std::size_t min_len, std::size_t max_len) {
  static const std::vector<std::string> kVocab = {"a",   "the",  "dog", "cat", "on",  "red",
                                                  "two", "man",  "sits", "runs", "in", "park"};
  std::string s;
  const std::size_t n = min_len + rng.UniformIndex(max_len - min_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + kVocab[rng.UniformIndex(kVocab.size())];
  return s;
}

void BleuOracle(Outcome& o) {
  Rng rng(20240601);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n_pairs = 1 + rng.UniformIndex(20);
    std::vector<EvalPair> pairs;
    std::vector<std::string> cands;
    std::vector<std::vector<std::string>> refs;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      EvalPair pair{std::to_string(p), RandomSentence(rng, 1, 12), {}};
      const std::size_t n_refs = 1 + rng.UniformIndex(3);
      for (std::size_t r = 0; r < n_refs; ++r) pair.references.push_back(RandomSentence(rng, 1, 12));
      cands.push_back(pair.candidate);
      refs.push_back(pair.references);
      pairs.push_back(std::move(pair));
    }
    const auto got = BleuCorpus(pairs);
    const auto want = testing::BruteForceBleu(cands, refs, 4);
    if (std::abs(got.brevity_penalty - want.bp) > kBleuTolerance) {
      o.Fail("corpus " + std::to_string(c) + " brevity penalty");
    }
    for (int n = 0; n < 4; ++n) {
      if (std::abs(got.bleu[n] - want.bleu[n]) > kBleuTolerance) {
        o.Fail("corpus " + std::to_string(c) + " BLEU@" + std::to_string(n + 1));
      }
    }
  }
  for (int c = 0; c < 50; ++c) {
    std::vector<EvalPair> pairs;
    const std::size_t n_pairs = 1 + rng.UniformIndex(20);
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const std::string s = RandomSentence(rng, 4, 12);
      pairs.push_back({std::to_string(p), s, {RandomSentence(rng, 1, 12), s}});
    }
    const auto got = BleuCorpus(pairs);
    for (int n = 0; n < 4; ++n) {
      if (got.bleu[n] != 1.0) o.Fail("identity corpus " + std::to_string(c) + " not 1.0");
    }
  }
  o.detail << (o.pass ? "" : "; ") << "200 random corpora vs brute force at 1e-9, 50 identity corpora";
}

// ---- 3 --------------------------------------------------------------------

void PerturbProperties(Outcome& o) {
  testing::CaptionGenerator gen(31337);
  const std::vector<std::string> male = {"man", "men", "boy", "boys", "guy", "guys"};
  const std::vector<std::string> color(testing::OracleColorWords().begin(),
                                       testing::OracleColorWords().end());
  const std::vector<std::string> number = {"one", "two", "three", "four", "five", "six"};
  auto pos = [&](const std::string& w) {
    return static_cast<int>(std::find(number.begin(), number.end(), w) - number.begin());
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const Skill skill = kAllSkills[trial % 3];
    const auto& pool = skill == Skill::kGender ? male : skill == Skill::kColor ? color : number;
    std::vector<std::string> planted = {gen.Pick(pool)};
    if (gen.rng.Coin()) planted.push_back(gen.Pick(pool));
    const std::string caption = gen.Make(planted);
    const std::string id = "trial " + std::to_string(trial) + " '" + caption + "'";
    PerturbedCaption out;
    try {
      out = Perturb(caption, skill, Lex(), gen.rng.Next());
    } catch (const Error& e) {
      o.Fail(id + ": " + e.what());
      continue;
    }
    if (Detect(out.perturbed, skill, Lex()).spans.empty()) o.Fail(id + " no longer detected");
    const auto before = Tokenize(caption);
    const auto after = Tokenize(out.perturbed);
    if (before.size() != after.size()) {
      o.Fail(id + " token count changed");
      continue;
    }
    std::set<std::size_t> differ, substituted;
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i].surface != after[i].surface) differ.insert(i);
    }
    for (const auto& s : out.substitutions) substituted.insert(s.token_index);
    if (differ != substituted) o.Fail(id + " differs outside substitution indices");
    if (skill != Skill::kCounting) continue;
    for (std::size_t i : substituted) {
      const std::string& from = before[i].lower;
      const std::string& to = after[i].lower;
      if (pos(to) >= static_cast<int>(number.size())) o.Fail(id + " produced '" + to + "'");
      if (std::abs(pos(from) - pos(to)) != 1) o.Fail(id + " " + from + "->" + to);
      if (from == "one" && to != "two") o.Fail(id + " one->" + to);
      if (from == "six" && to != "five") o.Fail(id + " six->" + to);
    }
  }
  o.detail << (o.pass ? "" : "; ") << "10000 captions, " << o.failures() << " violations";
}

// ---- 4 --------------------------------------------------------------------

// Renders until `limit` calls have gone through, then refuses everything, as
// a crashed run would leave things.
class InterruptedBackend : public Backend {
 public:
  explicit InterruptedBackend(std::size_t limit) : limit_(limit) {}
  std::string name() const override { return "stub"; }
  std::string Render(const GenerationRequest& r) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (rendered_.size() >= limit_) throw GenerationError("interrupted", false);
      rendered_.insert(r.prompt);
    }
    return inner_.Render(r);
  }
  std::set<std::string> rendered() const {
    std::lock_guard<std::mutex> lock(mu_);
    return rendered_;
  }

 private:
  std::size_t limit_;
  mutable std::mutex mu_;
  std::set<std::string> rendered_;
  StubBackend inner_;
};

// Records every prompt it renders.
class RecordingBackend : public Backend {
 public:
  std::string name() const override { return "stub"; }
  std::string Render(const GenerationRequest& r) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      prompts_.push_back(r.prompt);
    }
    return inner_.Render(r);
  }
  std::vector<std::string> prompts() const {
    std::lock_guard<std::mutex> lock(mu_);
    return prompts_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
  StubBackend inner_;
};

AugmentContext StubContext(Backend& backend, const fs::path& dir) {
  AugmentContext ctx;
  ctx.backend = &backend;
  ctx.width = 16;
  ctx.height = 16;
  ctx.batch.generate.image_dir = dir / "images";
  ctx.batch.journal = dir / "journal.jsonl";
  return ctx;
}

std::string Serialize(const DatasetManifest& m) {
  std::ostringstream out;
  WriteManifest(m, out);
  return out.str();
}

void EndToEnd(Outcome& o) {
  const Dataset toy = testing::ToyCorpus();
  const std::array<std::size_t, 3> budgets = {2, 2, 2};
  const uint64_t seed = 2023;
  testing::TempDir dir("accept_e2e");

  StubBackend stub;
  const auto ctx = StubContext(stub, dir / "a");
  const DatasetManifest m = BuildAll(toy, budgets, Lex(), ctx, seed);
  std::size_t originals = 0, augmented = 0;
  for (const auto& row : m.rows) {
    if (row.provenance.kind == Provenance::Kind::kOriginal) {
      ++originals;
      continue;
    }
    ++augmented;
    const auto& p = row.provenance;
    const auto at = toy.FindImage(p.source_image_id);
    if (!at) {
      o.Fail("unknown source " + p.source_image_id);
      continue;
    }
    const auto refs = toy.CaptionTexts(*at);
    if (p.source_ref_index < 0 || static_cast<std::size_t>(p.source_ref_index) >= refs.size()) {
      o.Fail("bad ref index for " + p.source_image_id);
      continue;
    }
    const auto again = Perturb(refs[p.source_ref_index], p.skill, Lex(), p.seed);
    if (again.perturbed != row.caption) o.Fail("caption not recomputable: " + row.caption);
  }
  if (toy.captions().size() != 50) o.Fail("toy corpus has " + std::to_string(toy.captions().size()));
  if (originals != 50) o.Fail(std::to_string(originals) + " originals");
  if (augmented != 6) o.Fail(std::to_string(augmented) + " augmented rows");
  if (!VerifyProvenance(m, toy, Lex()).empty()) o.Fail("VerifyProvenance flagged rows");
  if (stub.call_count() != 6) o.Fail(std::to_string(stub.call_count()) + " renders");

  // A fresh run in another directory with the same seed.
  StubBackend other;
  const std::string first = Serialize(m);
  auto rerun_ctx = StubContext(other, dir / "b");
  rerun_ctx.batch.generate.image_dir = ctx.batch.generate.image_dir;
  if (Serialize(BuildAll(toy, budgets, Lex(), rerun_ctx, seed)) != first) {
    o.Fail("rerun not byte-identical");
  }

  // Interrupted after three images, then resumed.
  InterruptedBackend interrupted(3);
  const auto resume_ctx = StubContext(interrupted, dir / "c");
  const auto partial = BuildAll(toy, budgets, Lex(), resume_ctx, seed);
  if (partial.failures.size() != 3) {
    o.Fail(std::to_string(partial.failures.size()) + " failures in interrupted run");
  }
  RecordingBackend resumed;
  auto resumed_ctx = resume_ctx;
  resumed_ctx.backend = &resumed;
  const auto finished = BuildAll(toy, budgets, Lex(), resumed_ctx, seed);
  const auto done_before = interrupted.rendered();
  std::size_t regenerated = 0;
  for (const auto& prompt : resumed.prompts()) regenerated += done_before.count(prompt);
  if (regenerated != 0) o.Fail(std::to_string(regenerated) + " items regenerated on resume");
  if (resumed.prompts().size() != 3) {
    o.Fail("resume rendered " + std::to_string(resumed.prompts().size()) + ", want 3");
  }
  if (!finished.failures.empty()) o.Fail("resumed run still has failures");
  // Rows record absolute image paths; compare with the image directory mapped across.
  std::string resumed_text = Serialize(finished);
  const std::string from = resume_ctx.batch.generate.image_dir.generic_string();
  const std::string to = ctx.batch.generate.image_dir.generic_string();
  for (std::size_t at; (at = resumed_text.find(from)) != std::string::npos;) {
    resumed_text.replace(at, from.size(), to);
  }
  if (resumed_text != first) o.Fail("resumed manifest differs from uninterrupted run");

  o.detail << (o.pass ? "" : "; ") << originals << " originals + " << augmented
           << " augmented rows, resume regenerated " << regenerated;
}

// ---- 5 --------------------------------------------------------------------

void Budgets(Outcome& o) {
  using cli::AugmentMode;
  const auto gender = cli::ResolveBudget(AugmentMode::kGender, 20000);
  if (gender.total() != 20000 || gender.skills[0] != 20000) o.Fail("gender 20000 resolves wrong");
  const auto all = cli::ResolveBudget(AugmentMode::kAll, std::nullopt);
  if (all.total() != 60000 || all.skills != std::array<std::size_t, 3>{20000, 20000, 20000}) {
    o.Fail("all with defaults resolves to " + std::to_string(all.total()));
  }

  testing::TempDir dir("accept_budget");
  const fs::path corpus = dir / "train.jsonl";
  WriteDatasetJsonl(testing::SyntheticCorpus(200, 8), corpus);

  // Scaled runs through the same resolution and augment path.
  struct Case {
    AugmentMode mode;
    std::optional<std::size_t> budget;
    std::size_t want;
  };
  const Case cases[] = {{AugmentMode::kGender, 20, 20}, {AugmentMode::kAll, 20, 60}};
  for (const auto& c : cases) {
    cli::AugmentSettings s;
    s.corpus = corpus;
    s.mode = c.mode;
    s.budget = cli::ResolveBudget(c.mode, c.budget);
    s.seed = 1;
    s.width = 16;
    s.height = 16;
    s.out_dir = dir / ("run" + std::to_string(c.want));
    StubBackend stub;
    const auto outcome = cli::RunAugment(s, stub);
    if (stub.call_count() != c.want) {
      o.Fail("expected " + std::to_string(c.want) + " generations, stub counted " +
             std::to_string(stub.call_count()));
    }
    if (outcome.manifest.budget_used != c.want) o.Fail("manifest budget_used mismatch");
  }

  // The same through the command line.
  std::ostringstream out, err;
  const std::string corpus_arg = corpus.string(), out_arg = (dir / "cli").string();
  std::vector<std::string> args = {"tida",  "augment", "--corpus", corpus_arg, "--skill",
                                   "gender", "--budget", "20",     "--width",  "16",
                                   "--height", "16",     "--out",  out_arg};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  const int code = cli::Main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0 || out.str().find("20 generations, 20 rendered") == std::string::npos) {
    o.Fail("command line run: " + out.str() + err.str());
  }
  o.detail << (o.pass ? "" : "; ")
           << "defaults 20000/60000, scaled runs counted 20 and 60 stub calls";
}

// ---- 6 --------------------------------------------------------------------

double OracleLoss(const std::vector<double>& x, int y, const MlpParams& p, Activation a) {
  double z = p.b2;
  for (int j = 0; j < p.hidden; ++j) {
    double h = p.b1[j];
    for (int i = 0; i < p.input_dim; ++i) h += p.w1[j * p.input_dim + i] * x[i];
    if (a == Activation::kRelu && h < 0) h = 0;
    z += p.w2[j] * h;
  }
  const double q = std::clamp(1.0 / (1.0 + std::exp(-z)), 1e-12, 1.0 - 1e-12);
  return -(y * std::log(q) + (1 - y) * std::log(1 - q));
}

void Probe(Outcome& o) {
  Rng rng(4242);
  const double step = 1e-5;
  double worst = 0;
  int checked = 0;
  while (checked < 100) {
    const int d = 1 + static_cast<int>(rng.UniformIndex(8));
    const int h = 1 + static_cast<int>(rng.UniformIndex(8));
    const Activation a = checked % 2 ? Activation::kIdentity : Activation::kRelu;
    auto p = MlpParams::Init(d, h, rng.Next());
    std::vector<double> x(d);
    for (auto& v : x) v = rng.UniformReal(-1.5, 1.5);
    const int y = static_cast<int>(rng.UniformIndex(2));
    bool near_kink = false;
    for (int j = 0; j < h; ++j) {
      double pre = p.b1[j];
      for (int i = 0; i < d; ++i) pre += p.w1[j * d + i] * x[i];
      near_kink |= std::abs(pre) < 1e-3;
    }
    if (a == Activation::kRelu && near_kink) continue;
    ++checked;
    const auto grad = BceLossAndGrad(x, y, p, a).grad.Flatten();
    auto flat = p.Flatten();
    for (std::size_t k = 0; k < flat.size(); ++k) {
      const double saved = flat[k];
      flat[k] = saved + step;
      p.Unflatten(flat);
      const double up = OracleLoss(x, y, p, a);
      flat[k] = saved - step;
      p.Unflatten(flat);
      const double down = OracleLoss(x, y, p, a);
      flat[k] = saved;
      p.Unflatten(flat);
      const double numeric = (up - down) / (2 * step);
      const double rel =
          std::abs(grad[k] - numeric) / std::max({std::abs(grad[k]), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  if (worst >= kGradientRelTolerance) o.Fail("gradient rel. error " + std::to_string(worst));

  const auto data = testing::Separable(500, 16, 0.5, 3, false);
  const auto splits = RandomSplits(500, 0.15, 0.15, 3);
  ProbeConfig config;
  config.hidden_sizes = {16, 64};
  config.learning_rates = {0.1, 0.01};
  config.max_epochs = 40;
  config.seed = 11;
  config.threads = 4;
  const auto first = TrainProbe(data.embeddings, data.labels, config, splits);
  if (first.f1 < kProbeMinF1) o.Fail("separable test F1 " + std::to_string(first.f1));
  config.threads = 1;
  const auto second = TrainProbe(data.embeddings, data.labels, config, splits);
  if (first.ToJson().dump() != second.ToJson().dump() ||
      first.val_loss_curve != second.val_loss_curve) {
    o.Fail("rerun not bit-identical");
  }
  std::ostringstream d;
  d.precision(2);
  d << "max gradient rel. error " << std::scientific << worst << std::fixed
    << ", separable F1 " << first.f1 << ", rerun identical";
  o.detail << (o.pass ? "" : "; ") << d.str();
}

// ---- 7 --------------------------------------------------------------------

void CorpusIntegrity(Outcome& o) {
  testing::TempDir dir("accept_corpus");
  const Dataset synthetic = testing::SyntheticCorpus(1000, 1234);
  // Captions needing JSON escapes and multibyte UTF-8 ride along.
  const std::vector<std::string> extras = {"A \"quoted\" caf\xc3\xa9 sign.",
                                           "Back\\slash and tab-free text",
                                           "Two men \xc2\xb7 one red hat", "\xe7\x8c\xab on a mat"};
  nlohmann::json images = nlohmann::json::array();
  std::map<std::string, std::vector<std::string>> raw;
  for (std::size_t i = 0; i < synthetic.images().size(); ++i) {
    const std::string& id = synthetic.images()[i].image_id;
    auto texts = synthetic.CaptionTexts(i);
    texts.push_back(extras[i % extras.size()]);
    raw[id] = texts;
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& t : texts) sentences.push_back({{"raw", t}});
    images.push_back({{"filename", id + ".jpg"}, {"split", "train"}, {"sentences", sentences}});
  }
  const fs::path split_file = dir / "dataset.json";
  testing::WriteText(split_file, nlohmann::json{{"images", images}}.dump());

  const Dataset loaded = LoadKarpathy(split_file, {}, Split::kTrain);
  if (loaded.images().size() != 1000) o.Fail("loaded " + std::to_string(loaded.images().size()));
  for (std::size_t i = 0; i < loaded.images().size(); ++i) {
    if (loaded.CaptionTexts(i) != raw[loaded.images()[i].image_id]) {
      o.Fail("caption text changed on load for " + loaded.images()[i].image_id);
    }
  }
  WriteDatasetJsonl(loaded, dir / "a.jsonl");
  const Dataset back = ReadDatasetJsonl(dir / "a.jsonl", Split::kTrain);
  if (!(back == loaded)) o.Fail("JSONL round trip changed the dataset");
  for (std::size_t c = 0; c < loaded.captions().size() && c < back.captions().size(); ++c) {
    if (back.captions()[c].text != loaded.captions()[c].text) {
      o.Fail("caption " + std::to_string(c) + " not byte-exact");
    }
  }
  WriteDatasetJsonl(back, dir / "b.jsonl");
  if (testing::Slurp(dir / "a.jsonl") != testing::Slurp(dir / "b.jsonl")) {
    o.Fail("second JSONL write differs");
  }

  for (uint64_t seed : {1u, 2u}) {
    const Dataset corpus = testing::SyntheticCorpus(1000, seed);
    for (Skill skill : kAllSkills) {
      const auto once = FilterBySkill(corpus, skill, Lex());
      const auto twice = FilterBySkill(once.dataset, skill, Lex());
      if (!(twice.dataset == once.dataset)) {
        o.Fail(std::string("filter not idempotent for ") + std::string(SkillName(skill)));
      }
    }
  }
  o.detail << (o.pass ? "" : "; ") << loaded.captions().size()
           << " captions byte-exact through JSONL, filter idempotent on 2x1000 images";
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> kCriteria = {
      {"published-f1-aggregation", 1, PublishedAggregation},
      {"bleu-oracle", 10, BleuOracle},
      {"detector-perturber-properties", 10, PerturbProperties},
      {"augment-end-to-end", 30, EndToEnd},
      {"budget-bookkeeping", 10, Budgets},
      {"probe-correctness", 60, Probe},
      {"corpus-integrity", 10, CorpusIntegrity},
  };
  return kCriteria;
}

bool RunCriterion(std::size_t n) {
  const Criterion& c = Criteria()[n - 1];
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(o);
  } catch (const std::exception& e) {
    o.Fail(std::string("threw: ") + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= c.limit_seconds) o.Fail("over time limit");
  std::printf("criterion %zu %s: %s %s [%.2fs, limit %.0fs]\n", n, c.name,
              o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), seconds, c.limit_seconds);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace
}  // namespace tida

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<std::size_t> selected;
  app.add_option("--criterion", selected, "Criterion number (repeatable; default all)")
      ->check(CLI::Range(std::size_t{1}, tida::Criteria().size()));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (std::size_t n = 1; n <= tida::Criteria().size(); ++n) selected.push_back(n);
  }
  bool all = true;
  for (std::size_t n : selected) all &= tida::RunCriterion(n);
  return all ? 0 : 1;
}
