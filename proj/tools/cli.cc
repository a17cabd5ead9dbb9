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

#include "cli.h"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "tida/corpus.h"
#include "tida/error.h"
#include "tida/metrics.h"
#include "tida/perturb.h"
#include "tida/probe.h"
#include "tida/skills.h"

namespace tida::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kTokenEnv = "TIDA_ENDPOINT_TOKEN";

SkillLexicon LoadLexicon(const fs::path& path) {
  return path.empty() ? SkillLexicon::Default() : SkillLexicon::Load(path);
}

void RequireFile(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is required");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " '" + path.string() + "' not found");
}

void EnsureDir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create directory '" + dir.string() + "'");
  }
}

Dataset LoadSplit(const fs::path& corpus, const fs::path& captions, Split split) {
  RequireFile(corpus, "corpus");
  if (!captions.empty()) {
    RequireFile(captions, "caption file");
    return LoadKarpathy(corpus, captions, split);
  }
  return LoadCorpus(corpus, split);
}

// Writes to `path`, or to `fallback` when the path is empty.
void Emit(const fs::path& path, const std::string& body, std::ostream& fallback) {
  if (path.empty()) {
    fallback << body;
    return;
  }
  if (path.has_parent_path()) EnsureDir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << body;
}

std::string ModeTag(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::kGender: return std::string(SkillTag(Skill::kGender));
    case AugmentMode::kColor: return std::string(SkillTag(Skill::kColor));
    case AugmentMode::kCounting: return std::string(SkillTag(Skill::kCounting));
    case AugmentMode::kAll: return "all";
    case AugmentMode::kRandom: return "rnd";
  }
  return "all";
}

// ---- detect ---------------------------------------------------------------

struct DetectFlags {
  fs::path corpus, captions, lexicon, out;
  std::string split = "train";
  std::vector<std::string> skills;
};

int RunDetect(const DetectFlags& f, std::ostream& out) {
  const SkillLexicon lexicon = LoadLexicon(f.lexicon);
  const Dataset dataset = LoadSplit(f.corpus, f.captions, ParseSplit(f.split));
  std::vector<Skill> skills;
  for (const auto& s : f.skills) skills.push_back(ParseSkill(s));
  if (skills.empty()) skills.assign(kAllSkills.begin(), kAllSkills.end());

  std::string index;
  out << "skill\timages\tcaptions\n";
  for (Skill skill : skills) {
    const SkillSubset subset = FilterBySkill(dataset, skill, lexicon);
    for (std::size_t c : subset.matched_captions) {
      const CaptionRecord& rec = subset.dataset.captions()[c];
      json spans = json::array();
      for (const auto& span : Detect(rec.text, skill, lexicon).spans) {
        spans.push_back({{"token_index", span.token_index}, {"word", span.word}});
      }
      index += json{{"skill", SkillName(skill)},
                    {"image_id", rec.image_id},
                    {"ref_index", rec.ref_index},
                    {"text", rec.text},
                    {"spans", spans}}
                   .dump() +
               "\n";
    }
    out << SkillName(skill) << '\t' << subset.dataset.images().size() << '\t'
        << subset.matched_captions.size() << '\n';
  }
  if (!f.out.empty()) Emit(f.out, index, out);
  return kExitOk;
}

// ---- perturb --------------------------------------------------------------

struct PerturbFlags {
  std::vector<std::string> captions;
  fs::path input, lexicon, out;
  std::string skill;
  uint64_t seed = 0;
  bool symmetric_gender = false;
  bool first_only = false;
};

int RunPerturb(const PerturbFlags& f, std::ostream& out, std::ostream& err) {
  const SkillLexicon lexicon = LoadLexicon(f.lexicon);
  const Skill skill = ParseSkill(f.skill);
  std::vector<std::string> captions = f.captions;
  if (!f.input.empty()) {
    RequireFile(f.input, "input");
    std::ifstream in(f.input);
    for (std::string line; std::getline(in, line);) {
      if (!NormalizeCaption(line).empty()) captions.push_back(line);
    }
  }
  if (captions.empty()) throw ConfigError("no captions given");
  PerturbOptions options;
  options.symmetric_gender = f.symmetric_gender;
  options.replace_all = !f.first_only;

  std::string body;
  int code = kExitOk;
  for (const auto& caption : captions) {
    try {
      const auto p = Perturb(caption, skill, lexicon, f.seed, options);
      json subs = json::array();
      for (const auto& s : p.substitutions) {
        subs.push_back({{"token_index", s.token_index}, {"old", s.old_word}, {"new", s.new_word}});
      }
      body += json{{"original", p.original},
                   {"perturbed", p.perturbed},
                   {"skill", SkillName(skill)},
                   {"seed", p.seed},
                   {"substitutions", subs}}
                  .dump() +
              "\n";
    } catch (const NoEligibleToken& e) {
      err << "tida perturb: " << e.what() << '\n';
      code = kExitInput;
    }
  }
  Emit(f.out, body, out);
  return code;
}

// ---- augment --------------------------------------------------------------

// Counts backend calls that produced an image, so reruns can report reuse.
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  std::string Render(const GenerationRequest& request) override {
    std::string png = inner_.Render(request);
    ++rendered_;
    return png;
  }
  std::size_t rendered() const { return rendered_.load(); }

 private:
  Backend& inner_;
  std::atomic<std::size_t> rendered_{0};
};

struct AugmentFlags {
  AugmentSettings settings;
  std::string mode = "all";
  std::optional<std::size_t> budget;
  std::string backend = "stub";
  std::string endpoint;
  int timeout_ms = 120000;
  int retries = 4;
};

int RunAugmentCommand(AugmentFlags f, std::ostream& out, std::ostream& err) {
  f.settings.mode = ParseAugmentMode(f.mode);
  f.settings.budget = ResolveBudget(f.settings.mode, f.budget);
  if (f.retries < 1) throw ConfigError("--retries must be >= 1");
  f.settings.retry.max_attempts = f.retries;
  const char* token = std::getenv(kTokenEnv);
  auto backend = MakeBackend(f.backend, f.endpoint, token ? token : "",
                             std::chrono::milliseconds(f.timeout_ms));
  CountingBackend counting(*backend);
  const AugmentOutcome outcome = RunAugment(f.settings, counting);
  const auto& m = outcome.manifest;
  out << m.name << ": " << m.rows.size() << " rows, " << m.budget_used << " generations, "
      << counting.rendered() << " rendered";
  for (const auto& [skill, missing] : m.shortfall) {
    out << ", " << skill << " short by " << missing;
  }
  out << "\nmanifest: " << outcome.manifest_path.string() << '\n';
  if (!m.failures.empty()) {
    err << "tida augment: " << m.failures.size() << " generation(s) failed; see "
        << outcome.failures_path.string() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateFlags {
  std::vector<std::string> candidates;
  fs::path corpus, captions, lexicon, out;
  std::string split = "test";
  std::string format = "markdown";
};

std::map<std::string, std::string> ReadCandidates(const fs::path& path) {
  RequireFile(path, "candidates");
  std::ifstream in(path, std::ios::binary);
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (NormalizeCaption(line).empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("image_id") ||
        !rec.contains("caption") || !rec.at("image_id").is_string() ||
        !rec.at("caption").is_string()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected {\"image_id\", \"caption\"}");
    }
    const std::string id = rec.at("image_id").get<std::string>();
    if (!out.emplace(id, rec.at("caption").get<std::string>()).second) {
      throw IntegrityError(path.string() + ": duplicate candidate for '" + id + "'");
    }
  }
  return out;
}

int RunEvaluate(const EvaluateFlags& f, std::ostream& out) {
  const SkillLexicon lexicon = LoadLexicon(f.lexicon);
  const ReportFormat format = ParseReportFormat(f.format);
  const Dataset test = LoadSplit(f.corpus, f.captions, ParseSplit(f.split));
  if (test.images().empty()) throw IntegrityError("split '" + f.split + "' has no images");
  if (f.candidates.empty()) throw ConfigError("at least one --candidates file is required");

  // Test subsets in report column order.
  std::vector<std::pair<std::string, std::set<std::string>>> test_sets;
  for (Skill skill : {Skill::kColor, Skill::kCounting, Skill::kGender}) {
    std::set<std::string> ids;
    const SkillSubset subset = FilterBySkill(test, skill, lexicon);
    for (const auto& img : subset.dataset.images()) {
      ids.insert(img.image_id);
    }
    if (!ids.empty()) test_sets.emplace_back(std::string(SkillTag(skill)), std::move(ids));
  }
  std::set<std::string> all_ids;
  for (const auto& img : test.images()) all_ids.insert(img.image_id);
  test_sets.emplace_back("all", all_ids);

  std::vector<ModelEvaluation> models;
  for (const auto& arg : f.candidates) {
    const auto eq = arg.find('=');
    const fs::path path = eq == std::string::npos ? arg : arg.substr(eq + 1);
    ModelEvaluation model;
    model.name = eq == std::string::npos ? path.stem().string() : arg.substr(0, eq);
    const auto candidates = ReadCandidates(path);
    for (const auto& [id, _] : candidates) {
      if (!all_ids.contains(id)) {
        throw IntegrityError(path.string() + ": image '" + id + "' is not in the " + f.split +
                             " split");
      }
    }
    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < test.images().size(); ++i) {
      const std::string& id = test.images()[i].image_id;
      auto it = candidates.find(id);
      if (it == candidates.end()) {
        throw IntegrityError(path.string() + ": no candidate for test image '" + id + "'");
      }
      pairs.push_back({id, it->second, test.CaptionTexts(i)});
    }
    for (const auto& [name, ids] : test_sets) {
      std::vector<EvalPair> subset;
      for (const auto& p : pairs) {
        if (ids.contains(p.image_id)) subset.push_back(p);
      }
      model.bleu.emplace_back(name, BleuCorpus(subset));
    }
    for (Skill skill : {Skill::kColor, Skill::kCounting, Skill::kGender}) {
      model.skills.emplace_back(skill, SkillPrf(SkillConfusion(pairs, skill, lexicon)));
    }
    models.push_back(std::move(model));
  }
  Emit(f.out, EmitReport(models, format), out);
  return kExitOk;
}

// ---- probe ----------------------------------------------------------------

struct ProbeFlags {
  fs::path embeddings, corpus, captions, lexicon, out;
  std::string split = "train";
  std::string skill;
  std::string activation = "relu";
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  ProbeConfig config;
};

int RunProbeCommand(ProbeFlags f, std::ostream& out) {
  const SkillLexicon lexicon = LoadLexicon(f.lexicon);
  const Skill skill = ParseSkill(f.skill);
  f.config.activation = ParseActivation(f.activation);
  f.config.Validate();
  RequireFile(f.embeddings, "embeddings");
  const Dataset dataset = LoadSplit(f.corpus, f.captions, ParseSplit(f.split));
  const ProbeDataset data = BuildProbeDataset(dataset, skill, lexicon, f.embeddings);
  const ProbeSplits splits =
      RandomSplits(data.embeddings.size(), f.val_fraction, f.test_fraction, f.config.seed);
  const ProbeResult result = TrainProbe(data.embeddings, data.labels, f.config, splits);

  std::size_t positives = 0;
  for (const auto& [id, y] : data.labels) positives += static_cast<std::size_t>(y);
  json doc = result.ToJson();
  doc["skill"] = SkillName(skill);
  doc["images"] = data.embeddings.size();
  doc["positives"] = positives;
  doc["seed"] = f.config.seed;
  doc["activation"] = ActivationName(f.config.activation);
  Emit(f.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

AugmentMode ParseAugmentMode(std::string_view name) {
  if (name == "all") return AugmentMode::kAll;
  if (name == "random" || name == "rnd") return AugmentMode::kRandom;
  switch (ParseSkill(name)) {
    case Skill::kGender: return AugmentMode::kGender;
    case Skill::kColor: return AugmentMode::kColor;
    case Skill::kCounting: return AugmentMode::kCounting;
  }
  return AugmentMode::kAll;
}

AugmentBudget ResolveBudget(AugmentMode mode, std::optional<std::size_t> budget) {
  AugmentBudget out;
  switch (mode) {
    case AugmentMode::kGender: out.skills[0] = budget.value_or(kDefaultSkillBudget); break;
    case AugmentMode::kColor: out.skills[1] = budget.value_or(kDefaultSkillBudget); break;
    case AugmentMode::kCounting: out.skills[2] = budget.value_or(kDefaultSkillBudget); break;
    case AugmentMode::kAll: out.skills.fill(budget.value_or(kDefaultSkillBudget)); break;
    case AugmentMode::kRandom: out.random = budget.value_or(kDefaultRandomBudget); break;
  }
  return out;
}

AugmentOutcome RunAugment(const AugmentSettings& s, Backend& backend) {
  // Everything that can fail cheaply is checked before generation starts.
  const SkillLexicon lexicon = LoadLexicon(s.lexicon);
  const Dataset train = LoadSplit(s.corpus, s.captions, Split::kTrain);
  if (s.max_in_flight == 0) throw ConfigError("--max-in-flight must be >= 1");
  GenerationRequest probe_request;
  probe_request.prompt = "x";
  probe_request.guidance_scale = s.guidance_scale;
  probe_request.width = s.width;
  probe_request.height = s.height;
  probe_request.Validate();

  const std::string name =
      "train_" + (s.label.empty() ? backend.name() : s.label) + "-" + ModeTag(s.mode);
  EnsureDir(s.out_dir);
  AugmentContext ctx;
  ctx.backend = &backend;
  ctx.max_in_flight = s.max_in_flight;
  ctx.guidance_scale = s.guidance_scale;
  ctx.width = s.width;
  ctx.height = s.height;
  ctx.perturb.symmetric_gender = s.symmetric_gender;
  ctx.label = s.label;
  ctx.batch.generate.image_dir = s.image_dir.empty() ? s.out_dir / "images" : s.image_dir;
  ctx.batch.generate.retry = s.retry;
  ctx.batch.journal = s.journal.empty() ? s.out_dir / (name + ".journal.jsonl") : s.journal;
  EnsureDir(ctx.batch.generate.image_dir);
  if (ctx.batch.journal.has_parent_path()) EnsureDir(ctx.batch.journal.parent_path());

  AugmentOutcome outcome;
  switch (s.mode) {
    case AugmentMode::kAll:
      outcome.manifest = BuildAll(train, s.budget.skills, lexicon, ctx, s.seed);
      break;
    case AugmentMode::kRandom:
      outcome.manifest = BuildRandomBaseline(train, s.budget.random, ctx, s.seed);
      outcome.manifest.lexicon_hash = lexicon.Hash();
      break;
    default: {
      const Skill skill = s.mode == AugmentMode::kGender  ? Skill::kGender
                          : s.mode == AugmentMode::kColor ? Skill::kColor
                                                          : Skill::kCounting;
      outcome.manifest = BuildTargeted(train, skill, s.budget.skills[static_cast<int>(skill)],
                                       lexicon, ctx, s.seed);
    }
  }
  outcome.manifest_path = s.out_dir / (outcome.manifest.name + ".jsonl");
  WriteManifest(outcome.manifest, outcome.manifest_path);
  if (!outcome.manifest.failures.empty()) {
    outcome.failures_path = s.out_dir / (outcome.manifest.name + ".failures.jsonl");
    WriteFailureReport(outcome.manifest, outcome.failures_path);
  }
  return outcome;
}

int Main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Targeted caption augmentation and evaluation"};
  app.name("tida");
  app.set_config("--config", "", "TOML file with option defaults; command-line flags win");
  app.require_subcommand(1);

  DetectFlags detect;
  auto* cmd_detect = app.add_subcommand("detect", "Count and index skill-bearing captions");
  cmd_detect->add_option("--corpus", detect.corpus, "Karpathy split JSON or dataset JSONL")
      ->required();
  cmd_detect->add_option("--captions", detect.captions, "Separate caption file");
  cmd_detect->add_option("--split", detect.split, "train, val or test")->capture_default_str();
  cmd_detect->add_option("--skill", detect.skills, "Skill to scan (repeatable; default all)");
  cmd_detect->add_option("--lexicon", detect.lexicon, "JSON lexicon overrides");
  cmd_detect->add_option("--out", detect.out, "Match index (JSONL)");

  PerturbFlags perturb;
  auto* cmd_perturb = app.add_subcommand("perturb", "Rewrite the skill words of captions");
  cmd_perturb->add_option("captions", perturb.captions, "Captions to perturb");
  cmd_perturb->add_option("--input", perturb.input, "File with one caption per line");
  cmd_perturb->add_option("--skill", perturb.skill, "gender, color or counting")->required();
  cmd_perturb->add_option("--seed", perturb.seed)->capture_default_str();
  cmd_perturb->add_flag("--symmetric-gender", perturb.symmetric_gender,
                        "Also rewrite female forms");
  cmd_perturb->add_flag("--first-only", perturb.first_only, "Rewrite only the first match");
  cmd_perturb->add_option("--lexicon", perturb.lexicon, "JSON lexicon overrides");
  cmd_perturb->add_option("--out", perturb.out, "Output JSONL (default stdout)");

  AugmentFlags augment;
  auto& as = augment.settings;
  auto* cmd_augment = app.add_subcommand("augment", "Build an augmented training manifest");
  cmd_augment->add_option("--corpus", as.corpus, "Karpathy split JSON or dataset JSONL")
      ->required();
  cmd_augment->add_option("--captions", as.captions, "Separate caption file");
  cmd_augment->add_option("--skill", augment.mode, "gender, color, counting, all or random")
      ->capture_default_str();
  cmd_augment->add_option("--budget", augment.budget,
                          "Generations per skill (random: in total); default 20000 / 60000");
  cmd_augment->add_option("--seed", as.seed)->capture_default_str();
  cmd_augment->add_option("--backend", augment.backend, "stub or remote")->capture_default_str();
  cmd_augment->add_option("--endpoint", augment.endpoint,
                          std::string("Remote service base URL; token from $") + kTokenEnv);
  cmd_augment->add_option("--timeout-ms", augment.timeout_ms)->capture_default_str();
  cmd_augment->add_option("--retries", augment.retries, "Attempts per image")
      ->capture_default_str();
  cmd_augment->add_option("--max-in-flight", as.max_in_flight)->capture_default_str();
  cmd_augment->add_option("--out", as.out_dir, "Output directory")->capture_default_str();
  cmd_augment->add_option("--image-dir", as.image_dir, "Image store (default <out>/images)");
  cmd_augment->add_option("--journal", as.journal, "Resume journal");
  cmd_augment->add_option("--guidance-scale", as.guidance_scale)->capture_default_str();
  cmd_augment->add_option("--width", as.width)->capture_default_str();
  cmd_augment->add_option("--height", as.height)->capture_default_str();
  cmd_augment->add_option("--lexicon", as.lexicon, "JSON lexicon overrides");
  cmd_augment->add_flag("--symmetric-gender", as.symmetric_gender, "Also rewrite female forms");
  cmd_augment->add_option("--label", as.label, "Manifest name label (default backend name)");

  EvaluateFlags evaluate;
  auto* cmd_evaluate = app.add_subcommand("evaluate", "BLEU and skill-word report");
  cmd_evaluate->add_option("--candidates", evaluate.candidates,
                           "[name=]path of generated captions (JSONL; repeatable)")
      ->required();
  cmd_evaluate->add_option("--corpus", evaluate.corpus, "Karpathy split JSON or dataset JSONL")
      ->required();
  cmd_evaluate->add_option("--captions", evaluate.captions, "Separate caption file");
  cmd_evaluate->add_option("--split", evaluate.split)->capture_default_str();
  cmd_evaluate->add_option("--format", evaluate.format, "csv or markdown")->capture_default_str();
  cmd_evaluate->add_option("--lexicon", evaluate.lexicon, "JSON lexicon overrides");
  cmd_evaluate->add_option("--out", evaluate.out, "Report file (default stdout)");

  ProbeFlags probe;
  auto* cmd_probe = app.add_subcommand("probe", "Train a skill probe on image embeddings");
  cmd_probe->add_option("--embeddings", probe.embeddings, "JSONL or binary embeddings")
      ->required();
  cmd_probe->add_option("--corpus", probe.corpus, "Karpathy split JSON or dataset JSONL")
      ->required();
  cmd_probe->add_option("--captions", probe.captions, "Separate caption file");
  cmd_probe->add_option("--split", probe.split)->capture_default_str();
  cmd_probe->add_option("--skill", probe.skill)->required();
  cmd_probe->add_option("--hidden", probe.config.hidden_sizes, "Hidden sizes to search")
      ->capture_default_str();
  cmd_probe->add_option("--lr", probe.config.learning_rates, "Learning rates to search")
      ->capture_default_str();
  cmd_probe->add_option("--patience", probe.config.patience)->capture_default_str();
  cmd_probe->add_option("--max-epochs", probe.config.max_epochs)->capture_default_str();
  cmd_probe->add_option("--batch-size", probe.config.batch_size)->capture_default_str();
  cmd_probe->add_option("--seed", probe.config.seed)->capture_default_str();
  cmd_probe->add_option("--threads", probe.config.threads, "0 = hardware concurrency")
      ->capture_default_str();
  cmd_probe->add_option("--activation", probe.activation, "relu or identity")
      ->capture_default_str();
  cmd_probe->add_option("--val-frac", probe.val_fraction)->capture_default_str();
  cmd_probe->add_option("--test-frac", probe.test_fraction)->capture_default_str();
  cmd_probe->add_option("--lexicon", probe.lexicon, "JSON lexicon overrides");
  cmd_probe->add_option("--out", probe.out, "Result JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*cmd_detect) return RunDetect(detect, out);
    if (*cmd_perturb) return RunPerturb(perturb, out, err);
    if (*cmd_augment) return RunAugmentCommand(augment, out, err);
    if (*cmd_evaluate) return RunEvaluate(evaluate, out);
    if (*cmd_probe) return RunProbeCommand(probe, out);
  } catch (const DegenerateLabels& e) {
    err << "tida: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const Error& e) {
    err << "tida: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace tida::cli
