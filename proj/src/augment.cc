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

#include "tida/augment.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tida/error.h"
#include "tida/random.h"

namespace tida {
namespace {

using nlohmann::json;

struct Candidate {
  std::string caption;
  Provenance provenance;
};

std::string Label(const AugmentContext& ctx) {
  return ctx.label.empty() ? ctx.backend->name() : ctx.label;
}

void CheckContext(const AugmentContext& ctx) {
  if (ctx.backend == nullptr) throw ConfigError("augment: no backend configured");
}

DatasetManifest StartManifest(const Dataset& train, const AugmentContext& ctx, uint64_t seed,
                              std::string_view tag) {
  DatasetManifest manifest;
  manifest.name = "train_" + Label(ctx) + "-" + std::string(tag);
  manifest.seed = seed;
  manifest.backend = ctx.backend->name();
  manifest.rows.reserve(train.captions().size());
  for (std::size_t i = 0; i < train.images().size(); ++i) {
    const auto [first, last] = train.CaptionRange(i);
    for (std::size_t c = first; c < last; ++c) {
      manifest.rows.push_back({train.captions()[c].text, train.images()[i], Provenance{}});
    }
  }
  return manifest;
}

std::vector<Candidate> TargetedCandidates(const Dataset& train, Skill skill, std::size_t budget,
                                          const SkillLexicon& lexicon, const AugmentContext& ctx,
                                          uint64_t seed, DatasetManifest& manifest) {
  const std::string name(SkillName(skill));
  const auto eligible = EligibleCaptions(train, skill, lexicon, ctx.perturb);
  manifest.budgets[name] = budget;
  if (budget > eligible.size()) manifest.shortfall[name] = budget - eligible.size();

  Rng rng(SplitMix64(seed ^ Fnv1a64(SkillTag(skill))));
  std::vector<Candidate> out;
  for (std::size_t pick : SampleWithoutReplacement(eligible.size(), budget, rng)) {
    const CaptionRecord& source = train.captions()[eligible[pick]];
    Provenance prov;
    prov.kind = Provenance::Kind::kTida;
    prov.skill = skill;
    prov.source_image_id = source.image_id;
    prov.source_ref_index = source.ref_index;
    prov.seed = RowSeed(seed, SkillTag(skill), source);
    out.push_back({Perturb(source.text, skill, lexicon, prov.seed, ctx.perturb).perturbed,
                   std::move(prov)});
  }
  return out;
}

// Generates one image per candidate and appends the successful pairs.
void AppendGenerated(DatasetManifest& manifest, const std::vector<Candidate>& candidates,
                     const AugmentContext& ctx) {
  std::vector<GenerationRequest> requests;
  requests.reserve(candidates.size());
  for (const auto& cand : candidates) {
    GenerationRequest req;
    req.prompt = cand.caption;
    req.guidance_scale = ctx.guidance_scale;
    req.width = ctx.width;
    req.height = ctx.height;
    req.seed = cand.provenance.seed;
    req.request_id = ContentKey(req, ctx.backend->name());
    requests.push_back(std::move(req));
  }
  const BatchReport report = GenerateBatch(requests, *ctx.backend, ctx.max_in_flight, ctx.batch);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& item = report.items[i];
    if (!item.result) {
      manifest.failures.push_back({requests[i].request_id, candidates[i].caption,
                                   candidates[i].provenance.source_image_id,
                                   candidates[i].provenance.source_ref_index, item.error});
      continue;
    }
    ImageRef image;
    image.image_id = "gen-" + requests[i].request_id.substr(0, 24);
    image.file_path = item.result->image_path.generic_string();
    manifest.rows.push_back({candidates[i].caption, std::move(image), candidates[i].provenance});
    ++manifest.budget_used;
  }
}

const char* KindName(Provenance::Kind kind) {
  switch (kind) {
    case Provenance::Kind::kOriginal: return "original";
    case Provenance::Kind::kTida: return "tida";
    case Provenance::Kind::kRandomBaseline: return "random_baseline";
  }
  return "original";
}

json RowToJson(const ManifestRow& row) {
  json prov;
  prov["kind"] = KindName(row.provenance.kind);
  if (row.provenance.kind == Provenance::Kind::kTida) {
    prov["skill"] = SkillName(row.provenance.skill);
  }
  if (row.provenance.kind != Provenance::Kind::kOriginal) {
    prov["source_image_id"] = row.provenance.source_image_id;
    prov["source_ref_index"] = row.provenance.source_ref_index;
    prov["seed"] = row.provenance.seed;
  }
  json rec;
  rec["caption"] = row.caption;
  rec["image"] = {{"image_id", row.image.image_id},
                  {"file_path", row.image.file_path ? json(*row.image.file_path) : json(nullptr)}};
  rec["provenance"] = std::move(prov);
  return rec;
}

ManifestRow RowFromJson(const json& rec) {
  ManifestRow row;
  row.caption = rec.at("caption").get<std::string>();
  const auto& image = rec.at("image");
  row.image.image_id = image.at("image_id").get<std::string>();
  if (image.contains("file_path") && !image.at("file_path").is_null()) {
    row.image.file_path = image.at("file_path").get<std::string>();
  }
  const auto& prov = rec.at("provenance");
  const std::string kind = prov.at("kind").get<std::string>();
  if (kind == "original") {
    row.provenance.kind = Provenance::Kind::kOriginal;
  } else if (kind == "tida" || kind == "random_baseline") {
    row.provenance.kind =
        kind == "tida" ? Provenance::Kind::kTida : Provenance::Kind::kRandomBaseline;
    if (kind == "tida") row.provenance.skill = ParseSkill(prov.at("skill").get<std::string>());
    row.provenance.source_image_id = prov.at("source_image_id").get<std::string>();
    row.provenance.source_ref_index = prov.at("source_ref_index").get<int>();
    if (prov.contains("seed")) row.provenance.seed = prov.at("seed").get<uint64_t>();
  } else {
    throw ParseError("manifest: unknown provenance kind '" + kind + "'");
  }
  return row;
}

}  // namespace

uint64_t RowSeed(uint64_t run_seed, std::string_view tag, const CaptionRecord& source) {
  uint64_t h = Fnv1a64(tag);
  h = Fnv1a64(std::string_view("\0", 1), h);
  h = Fnv1a64(source.image_id, h);
  h = Fnv1a64(std::string_view("\0", 1), h);
  h = Fnv1a64(std::to_string(source.ref_index), h);
  return SplitMix64(run_seed ^ h);
}

std::vector<std::size_t> EligibleCaptions(const Dataset& train, Skill skill,
                                          const SkillLexicon& lexicon,
                                          const PerturbOptions& options) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < train.captions().size(); ++c) {
    if (CanPerturb(train.captions()[c].text, skill, lexicon, options)) out.push_back(c);
  }
  return out;
}

DatasetManifest BuildTargeted(const Dataset& train, Skill skill, std::size_t budget,
                              const SkillLexicon& lexicon, const AugmentContext& ctx,
                              uint64_t seed) {
  CheckContext(ctx);
  DatasetManifest manifest = StartManifest(train, ctx, seed, SkillTag(skill));
  manifest.lexicon_hash = lexicon.Hash();
  const auto candidates = TargetedCandidates(train, skill, budget, lexicon, ctx, seed, manifest);
  AppendGenerated(manifest, candidates, ctx);
  return manifest;
}

DatasetManifest BuildAll(const Dataset& train, const std::array<std::size_t, 3>& budgets,
                         const SkillLexicon& lexicon, const AugmentContext& ctx, uint64_t seed) {
  CheckContext(ctx);
  DatasetManifest manifest = StartManifest(train, ctx, seed, "all");
  manifest.lexicon_hash = lexicon.Hash();
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < kAllSkills.size(); ++s) {
    auto part = TargetedCandidates(train, kAllSkills[s], budgets[s], lexicon, ctx, seed, manifest);
    candidates.insert(candidates.end(), std::make_move_iterator(part.begin()),
                      std::make_move_iterator(part.end()));
  }
  AppendGenerated(manifest, candidates, ctx);
  return manifest;
}

DatasetManifest BuildRandomBaseline(const Dataset& train, std::size_t budget,
                                    const AugmentContext& ctx, uint64_t seed) {
  CheckContext(ctx);
  DatasetManifest manifest = StartManifest(train, ctx, seed, "rnd");
  const std::size_t total = train.captions().size();
  manifest.budgets["random"] = budget;
  if (budget > total) manifest.shortfall["random"] = budget - total;

  Rng rng(SplitMix64(seed ^ Fnv1a64("rnd")));
  std::vector<Candidate> candidates;
  for (std::size_t pick : SampleWithoutReplacement(total, budget, rng)) {
    const CaptionRecord& source = train.captions()[pick];
    Provenance prov;
    prov.kind = Provenance::Kind::kRandomBaseline;
    prov.source_image_id = source.image_id;
    prov.source_ref_index = source.ref_index;
    prov.seed = RowSeed(seed, "rnd", source);
    candidates.push_back({source.text, std::move(prov)});
  }
  AppendGenerated(manifest, candidates, ctx);
  return manifest;
}

void WriteManifest(const DatasetManifest& manifest, std::ostream& out) {
  json header;
  header["name"] = manifest.name;
  header["seed"] = manifest.seed;
  header["budgets"] = manifest.budgets;
  header["budget_used"] = manifest.budget_used;
  header["shortfall"] = manifest.shortfall;
  header["backend"] = manifest.backend;
  header["lexicon_hash"] = manifest.lexicon_hash;
  out << header.dump() << '\n';
  for (const auto& row : manifest.rows) out << RowToJson(row).dump() << '\n';
}

void WriteManifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest '" + path.string() + "'");
  WriteManifest(manifest, out);
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

DatasetManifest ReadManifest(std::istream& in) {
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  std::size_t line_start = 0;
  std::size_t next_start = 0;
  try {
    if (!std::getline(in, line)) throw ParseError("manifest: missing header line");
    ++line_no;
    next_start = line.size() + 1;
    const json header = json::parse(line);
    manifest.name = header.at("name").get<std::string>();
    manifest.seed = header.at("seed").get<uint64_t>();
    manifest.budgets = header.at("budgets").get<std::map<std::string, std::size_t>>();
    manifest.budget_used = header.at("budget_used").get<std::size_t>();
    if (header.contains("shortfall")) {
      manifest.shortfall = header.at("shortfall").get<std::map<std::string, std::size_t>>();
    }
    manifest.backend = header.at("backend").get<std::string>();
    manifest.lexicon_hash = header.at("lexicon_hash").get<std::string>();
    while (std::getline(in, line)) {
      ++line_no;
      line_start = next_start;
      next_start += line.size() + 1;
      if (line.empty()) continue;
      manifest.rows.push_back(RowFromJson(json::parse(line)));
    }
  } catch (const json::parse_error& e) {
    throw ParseError("manifest line " + std::to_string(line_no) + ": " + e.what(),
                     line_start + (e.byte > 0 ? e.byte - 1 : 0));
  } catch (const json::exception& e) {
    throw ParseError("manifest line " + std::to_string(line_no) + ": " + e.what());
  }
  return manifest;
}

DatasetManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
  return ReadManifest(in);
}

void WriteFailureReport(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write failure report '" + path.string() + "'");
  for (const auto& f : manifest.failures) {
    json rec;
    rec["request_id"] = f.request_id;
    rec["caption"] = f.caption;
    rec["source_image_id"] = f.source_image_id;
    rec["source_ref_index"] = f.source_ref_index;
    rec["error"] = f.error;
    out << rec.dump() << '\n';
  }
}

std::vector<std::size_t> VerifyProvenance(const DatasetManifest& manifest, const Dataset& train,
                                          const SkillLexicon& lexicon,
                                          const PerturbOptions& options) {
  std::map<std::pair<std::string, int>, const std::string*> source_text;
  for (const auto& c : train.captions()) source_text[{c.image_id, c.ref_index}] = &c.text;

  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& row = manifest.rows[i];
    if (row.provenance.kind != Provenance::Kind::kTida) continue;
    auto it = source_text.find({row.provenance.source_image_id, row.provenance.source_ref_index});
    if (it == source_text.end()) {
      bad.push_back(i);
      continue;
    }
    try {
      const auto redo =
          Perturb(*it->second, row.provenance.skill, lexicon, row.provenance.seed, options);
      if (redo.perturbed != row.caption) bad.push_back(i);
    } catch (const NoEligibleToken&) {
      bad.push_back(i);
    }
  }
  return bad;
}

}  // namespace tida
