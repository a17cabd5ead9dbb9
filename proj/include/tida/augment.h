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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tida/corpus.h"
#include "tida/genclient.h"
#include "tida/perturb.h"
#include "tida/skills.h"

namespace tida {

struct Provenance {
  enum class Kind { kOriginal, kTida, kRandomBaseline };
  Kind kind = Kind::kOriginal;
  Skill skill = Skill::kGender;  // kTida only
  std::string source_image_id;   // kTida, kRandomBaseline
  int source_ref_index = 0;      // kTida, kRandomBaseline
  uint64_t seed = 0;             // perturbation and generation seed

  bool operator==(const Provenance&) const = default;
};

struct ManifestRow {
  std::string caption;
  ImageRef image;
  Provenance provenance;

  bool operator==(const ManifestRow&) const = default;
};

struct GenerationFailure {
  std::string request_id;
  std::string caption;
  std::string source_image_id;
  int source_ref_index = 0;
  std::string error;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestRow> rows;
  std::size_t budget_used = 0;

  // Header metadata.
  uint64_t seed = 0;
  std::map<std::string, std::size_t> budgets;    // requested, keyed by skill name or "random"
  std::map<std::string, std::size_t> shortfall;  // budget minus eligible, when positive
  std::string backend;
  std::string lexicon_hash;

  // Generation failures; written to a sidecar report, not the manifest.
  std::vector<GenerationFailure> failures;
};

struct AugmentContext {
  Backend* backend = nullptr;
  BatchOptions batch;
  std::size_t max_in_flight = 8;
  double guidance_scale = 8.0;
  int width = 128;
  int height = 128;
  PerturbOptions perturb;
  // Manifest names read "train_<label>-<tag>"; defaults to the backend name.
  std::string label;
};

// Seed recorded on an augmented row, derived from the run seed and the
// source caption.
uint64_t RowSeed(uint64_t run_seed, std::string_view tag, const CaptionRecord& source);

// Captions of `train` the skill's perturber can rewrite, as indices into
// train.captions().
std::vector<std::size_t> EligibleCaptions(const Dataset& train, Skill skill,
                                          const SkillLexicon& lexicon,
                                          const PerturbOptions& options = {});

// Copies every original row, samples `budget` eligible captions without
// replacement (all of them when fewer exist), perturbs each, generates an
// image per perturbed caption and appends the new single-caption pairs.
DatasetManifest BuildTargeted(const Dataset& train, Skill skill, std::size_t budget,
                              const SkillLexicon& lexicon, const AugmentContext& ctx,
                              uint64_t seed);

// One copy of the originals followed by the gender, color and counting
// augmentations, in that order. `budgets` is indexed like kAllSkills.
DatasetManifest BuildAll(const Dataset& train, const std::array<std::size_t, 3>& budgets,
                         const SkillLexicon& lexicon, const AugmentContext& ctx, uint64_t seed);

// Samples `budget` captions from all of train and generates an image for
// each unmodified caption.
DatasetManifest BuildRandomBaseline(const Dataset& train, std::size_t budget,
                                    const AugmentContext& ctx, uint64_t seed);

// Manifest file: a header object on the first line, then one row per line.
void WriteManifest(const DatasetManifest& manifest, std::ostream& out);
void WriteManifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest ReadManifest(std::istream& in);
DatasetManifest ReadManifest(const std::filesystem::path& path);
void WriteFailureReport(const DatasetManifest& manifest, const std::filesystem::path& path);

// Indices of tida rows whose caption does not match re-running the perturber
// on the recorded source caption, skill and seed.
std::vector<std::size_t> VerifyProvenance(const DatasetManifest& manifest, const Dataset& train,
                                          const SkillLexicon& lexicon,
                                          const PerturbOptions& options = {});

}  // namespace tida
