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
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "tida/augment.h"
#include "tida/genclient.h"

namespace tida::cli {

enum ExitCode {
  kExitOk = 0,
  kExitInput = 2,           // unreadable, malformed or inconsistent input; bad flags
  kExitPartial = 3,         // some generations failed; the manifest omits them
  kExitDegenerate = 4,      // statistics undefined (single-class labels)
};

enum class AugmentMode { kGender, kColor, kCounting, kAll, kRandom };

AugmentMode ParseAugmentMode(std::string_view name);

inline constexpr std::size_t kDefaultSkillBudget = 20000;
inline constexpr std::size_t kDefaultRandomBudget = 60000;

struct AugmentBudget {
  std::array<std::size_t, 3> skills{};  // gender, color, counting
  std::size_t random = 0;

  std::size_t total() const { return skills[0] + skills[1] + skills[2] + random; }
};

// `--budget` is per skill for targeted modes (all three skills under "all")
// and the sample size for "random". Absent, the defaults apply.
AugmentBudget ResolveBudget(AugmentMode mode, std::optional<std::size_t> budget);

struct AugmentSettings {
  std::filesystem::path corpus;
  std::filesystem::path captions;
  std::filesystem::path lexicon;
  AugmentMode mode = AugmentMode::kAll;
  AugmentBudget budget;
  uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  std::filesystem::path image_dir;  // default <out_dir>/images
  std::filesystem::path journal;    // default <out_dir>/<name>.journal.jsonl
  std::size_t max_in_flight = 8;
  double guidance_scale = 8.0;
  int width = 128;
  int height = 128;
  bool symmetric_gender = false;
  std::string label;
  RetryPolicy retry;
};

struct AugmentOutcome {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
  std::filesystem::path failures_path;  // empty when nothing failed
};

// Loads the train split, builds the manifest on `backend` and writes it.
AugmentOutcome RunAugment(const AugmentSettings& settings, Backend& backend);

// Parses argv, runs one subcommand and returns its exit code.
int Main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tida::cli
