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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tida/skills.h"

namespace tida {

enum class Split { kTrain, kVal, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct ImageRef {
  std::string image_id;
  std::optional<std::string> file_path;  // absent for images not yet generated

  bool operator==(const ImageRef&) const = default;
};

struct CaptionRecord {
  std::string image_id;
  int ref_index = 0;
  std::string text;

  bool operator==(const CaptionRecord&) const = default;
};

// Immutable image/caption collection for one split. Images are ordered by
// image_id, captions by (image_id, ref_index).
class Dataset {
 public:
  Dataset() = default;
  // Sorts and validates; throws IntegrityError on any violated invariant.
  Dataset(Split split, std::vector<ImageRef> images, std::vector<CaptionRecord> captions);

  Split split() const { return split_; }
  const std::vector<ImageRef>& images() const { return images_; }
  const std::vector<CaptionRecord>& captions() const { return captions_; }

  // Index range [first, last) into captions() for the image at `image_index`.
  std::pair<std::size_t, std::size_t> CaptionRange(std::size_t image_index) const {
    return {caption_offsets_[image_index], caption_offsets_[image_index + 1]};
  }
  std::vector<std::string> CaptionTexts(std::size_t image_index) const;
  std::optional<std::size_t> FindImage(std::string_view image_id) const;

  bool operator==(const Dataset& other) const {
    return split_ == other.split_ && images_ == other.images_ && captions_ == other.captions_;
  }

 private:
  Split split_ = Split::kTrain;
  std::vector<ImageRef> images_;
  std::vector<CaptionRecord> captions_;
  std::vector<std::size_t> caption_offsets_{0};
};

// Reads a Karpathy split file ({"images": [{"filename", "split", "sentences":
// [{"raw"}...]}...]}) and keeps the images of `split`. Images tagged
// "restval" are not part of any split.
//
// `captions_source` may be empty, in which case captions come from the
// "sentences" arrays. Otherwise it names a separate caption file: either JSONL
// of {"image_id", "ref_index"?, "text"} or a JSON object mapping image_id to a
// list of strings. Captions there must reference images of the split file.
Dataset LoadKarpathy(const std::filesystem::path& split_file,
                     const std::filesystem::path& captions_source, Split split);
Dataset ParseKarpathy(std::string_view split_json, Split split);

// One record per line:
//   {"image_id": ..., "ref_index": ..., "text": ..., "file_path": ... | null}
void WriteDatasetJsonl(const Dataset& dataset, std::ostream& out);
void WriteDatasetJsonl(const Dataset& dataset, const std::filesystem::path& path);
Dataset ReadDatasetJsonl(std::istream& in, Split split);
Dataset ReadDatasetJsonl(const std::filesystem::path& path, Split split);

// Either a Karpathy JSON split file or a dataset JSONL file, chosen by
// extension (".jsonl" means JSONL).
Dataset LoadCorpus(const std::filesystem::path& path, Split split);

struct SkillSubset {
  Dataset dataset;
  // Indices into dataset.captions() whose text fired the detector.
  std::vector<std::size_t> matched_captions;
};

// Keeps every image with at least one matching reference caption, together
// with all of its captions.
SkillSubset FilterBySkill(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon);

}  // namespace tida
