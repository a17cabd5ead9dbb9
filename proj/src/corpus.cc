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

#include "tida/corpus.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tida/error.h"
#include "tida/text.h"

namespace tida {
namespace {

using nlohmann::json;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

json ParseJson(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(what + ": malformed JSON at byte " + std::to_string(at) + ": " + e.what(),
                     at);
  }
}

std::string StemOf(const std::string& filename) {
  return std::filesystem::path(filename).stem().string();
}

CaptionRecord MakeCaption(std::string image_id, int ref_index, std::string_view raw) {
  std::string text = NormalizeCaption(raw);
  if (text.empty()) {
    throw IntegrityError("empty caption " + std::to_string(ref_index) + " for image '" +
                         image_id + "'");
  }
  return {std::move(image_id), ref_index, std::move(text)};
}

// Reads either JSONL records or a {image_id: [captions]} object.
std::vector<CaptionRecord> ReadCaptionSource(const std::filesystem::path& path) {
  const std::string body = ReadFile(path);
  std::vector<CaptionRecord> out;
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;

  if (path.extension() != ".jsonl") {
    const json doc = ParseJson(body, path.string());
    if (!doc.is_object()) throw ParseError(path.string() + ": expected an object of caption lists");
    for (const auto& [id, list] : doc.items()) {
      int ref = 0;
      for (const auto& text : list) out.push_back(MakeCaption(id, ref++, text.get<std::string>()));
    }
    return out;
  }

  std::unordered_map<std::string, int> next_ref;
  std::size_t line_start = 0;
  while (line_start < body.size()) {
    std::size_t line_end = body.find('\n', line_start);
    if (line_end == std::string::npos) line_end = body.size();
    const std::string_view line(body.data() + line_start, line_end - line_start);
    if (!IsBlank(line)) {
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error& e) {
        const std::size_t offset = line_start + (e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(path.string() + ": malformed JSON at byte " + std::to_string(offset),
                         offset);
      }
      std::string id = rec.at("image_id").get<std::string>();
      int ref = rec.contains("ref_index") ? rec.at("ref_index").get<int>() : next_ref[id];
      next_ref[id] = std::max(next_ref[id], ref + 1);
      out.push_back(MakeCaption(std::move(id), ref, rec.at("text").get<std::string>()));
    }
    line_start = line_end + 1;
  }
  return out;
}

struct KarpathyImage {
  ImageRef ref;
  std::string split;
  std::vector<std::string> sentences;
};

std::vector<KarpathyImage> ParseKarpathyImages(std::string_view body, const std::string& what) {
  std::vector<KarpathyImage> out;
  if (IsBlank(body)) return out;
  const json doc = ParseJson(body, what);
  if (!doc.is_object() || !doc.contains("images") || !doc.at("images").is_array()) {
    throw ParseError(what + ": expected an object with an \"images\" array");
  }
  try {
    for (const auto& node : doc.at("images")) {
      KarpathyImage image;
      const std::string filename = node.at("filename").get<std::string>();
      image.ref.image_id = StemOf(filename);
      if (node.contains("filepath") && !node.at("filepath").get<std::string>().empty()) {
        image.ref.file_path = node.at("filepath").get<std::string>() + "/" + filename;
      } else {
        image.ref.file_path = filename;
      }
      image.split = node.at("split").get<std::string>();
      if (node.contains("sentences")) {
        for (const auto& sentence : node.at("sentences")) {
          if (sentence.contains("raw")) {
            image.sentences.push_back(sentence.at("raw").get<std::string>());
          } else {
            std::string joined;
            for (const auto& tok : sentence.at("tokens")) {
              if (!joined.empty()) joined.push_back(' ');
              joined += tok.get<std::string>();
            }
            image.sentences.push_back(std::move(joined));
          }
        }
      }
      out.push_back(std::move(image));
    }
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  return out;
}

Dataset BuildFromKarpathy(std::vector<KarpathyImage> all, Split split,
                          const std::vector<CaptionRecord>* external) {
  const std::string wanted(SplitName(split));
  std::vector<ImageRef> images;
  std::vector<CaptionRecord> captions;
  std::set<std::string> known;
  std::set<std::string> in_split;
  for (auto& image : all) {
    if (!known.insert(image.ref.image_id).second) {
      throw IntegrityError("duplicate image id '" + image.ref.image_id + "'");
    }
    if (image.split != wanted) continue;
    in_split.insert(image.ref.image_id);
    if (external == nullptr) {
      for (std::size_t i = 0; i < image.sentences.size(); ++i) {
        captions.push_back(
            MakeCaption(image.ref.image_id, static_cast<int>(i), image.sentences[i]));
      }
    }
    images.push_back(std::move(image.ref));
  }
  if (external != nullptr) {
    for (const auto& caption : *external) {
      if (!known.contains(caption.image_id)) {
        throw IntegrityError("caption references unknown image '" + caption.image_id + "'");
      }
      if (in_split.contains(caption.image_id)) captions.push_back(caption);
    }
  }
  return Dataset(split, std::move(images), std::move(captions));
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

Dataset::Dataset(Split split, std::vector<ImageRef> images, std::vector<CaptionRecord> captions)
    : split_(split), images_(std::move(images)), captions_(std::move(captions)) {
  std::sort(images_.begin(), images_.end(),
            [](const ImageRef& a, const ImageRef& b) { return a.image_id < b.image_id; });
  std::sort(captions_.begin(), captions_.end(), [](const CaptionRecord& a, const CaptionRecord& b) {
    return std::tie(a.image_id, a.ref_index) < std::tie(b.image_id, b.ref_index);
  });

  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i].image_id.empty()) throw IntegrityError("empty image id");
    if (i > 0 && images_[i].image_id == images_[i - 1].image_id) {
      throw IntegrityError("duplicate image id '" + images_[i].image_id + "'");
    }
  }
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    const auto& c = captions_[i];
    if (c.ref_index < 0) {
      throw IntegrityError("negative ref_index for image '" + c.image_id + "'");
    }
    if (i > 0 && c.image_id == captions_[i - 1].image_id &&
        c.ref_index == captions_[i - 1].ref_index) {
      throw IntegrityError("duplicate caption (" + c.image_id + ", " +
                           std::to_string(c.ref_index) + ")");
    }
    if (IsBlank(c.text)) throw IntegrityError("empty caption for image '" + c.image_id + "'");
  }

  // Both vectors are sorted by image_id, so one merge pass assigns ranges.
  caption_offsets_.assign(images_.size() + 1, 0);
  std::size_t c = 0;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    caption_offsets_[i] = c;
    if (c < captions_.size() && captions_[c].image_id < images_[i].image_id) {
      throw IntegrityError("caption references unknown image '" + captions_[c].image_id + "'");
    }
    while (c < captions_.size() && captions_[c].image_id == images_[i].image_id) ++c;
    if (c == caption_offsets_[i]) {
      throw IntegrityError("image '" + images_[i].image_id + "' has no captions");
    }
  }
  if (c != captions_.size()) {
    throw IntegrityError("caption references unknown image '" + captions_[c].image_id + "'");
  }
  caption_offsets_[images_.size()] = c;
}

std::vector<std::string> Dataset::CaptionTexts(std::size_t image_index) const {
  const auto [first, last] = CaptionRange(image_index);
  std::vector<std::string> out;
  out.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) out.push_back(captions_[i].text);
  return out;
}

std::optional<std::size_t> Dataset::FindImage(std::string_view image_id) const {
  auto it = std::lower_bound(images_.begin(), images_.end(), image_id,
                             [](const ImageRef& a, std::string_view id) { return a.image_id < id; });
  if (it == images_.end() || it->image_id != image_id) return std::nullopt;
  return static_cast<std::size_t>(it - images_.begin());
}

Dataset ParseKarpathy(std::string_view split_json, Split split) {
  return BuildFromKarpathy(ParseKarpathyImages(split_json, "split file"), split, nullptr);
}

Dataset LoadKarpathy(const std::filesystem::path& split_file,
                     const std::filesystem::path& captions_source, Split split) {
  auto images = ParseKarpathyImages(ReadFile(split_file), split_file.string());
  if (captions_source.empty() || captions_source == split_file) {
    return BuildFromKarpathy(std::move(images), split, nullptr);
  }
  const auto external = ReadCaptionSource(captions_source);
  return BuildFromKarpathy(std::move(images), split, &external);
}

void WriteDatasetJsonl(const Dataset& dataset, std::ostream& out) {
  for (std::size_t i = 0; i < dataset.images().size(); ++i) {
    const auto& image = dataset.images()[i];
    const auto [first, last] = dataset.CaptionRange(i);
    for (std::size_t c = first; c < last; ++c) {
      const auto& caption = dataset.captions()[c];
      json rec;
      rec["image_id"] = caption.image_id;
      rec["ref_index"] = caption.ref_index;
      rec["text"] = caption.text;
      rec["file_path"] = image.file_path ? json(*image.file_path) : json(nullptr);
      out << rec.dump() << '\n';
    }
  }
}

void WriteDatasetJsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  WriteDatasetJsonl(dataset, out);
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

Dataset ReadDatasetJsonl(std::istream& in, Split split) {
  std::map<std::string, ImageRef> images;
  std::vector<CaptionRecord> captions;
  std::string line;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (IsBlank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      const std::size_t at = line_offset + (e.byte > 0 ? e.byte - 1 : 0);
      throw ParseError("dataset JSONL line " + std::to_string(line_no) +
                           ": malformed JSON at byte " + std::to_string(at),
                       at);
    }
    try {
      ImageRef ref;
      ref.image_id = rec.at("image_id").get<std::string>();
      if (rec.contains("file_path") && !rec.at("file_path").is_null()) {
        ref.file_path = rec.at("file_path").get<std::string>();
      }
      auto [it, inserted] = images.emplace(ref.image_id, ref);
      if (!inserted && it->second.file_path != ref.file_path) {
        throw IntegrityError("conflicting file_path for image '" + ref.image_id + "'");
      }
      captions.push_back(MakeCaption(ref.image_id, rec.at("ref_index").get<int>(),
                                     rec.at("text").get<std::string>()));
    } catch (const json::exception& e) {
      throw ParseError("dataset JSONL line " + std::to_string(line_no) + ": " + e.what(),
                       line_offset);
    }
  }
  std::vector<ImageRef> refs;
  refs.reserve(images.size());
  for (auto& [id, ref] : images) refs.push_back(std::move(ref));
  return Dataset(split, std::move(refs), std::move(captions));
}

Dataset ReadDatasetJsonl(const std::filesystem::path& path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return ReadDatasetJsonl(in, split);
}

Dataset LoadCorpus(const std::filesystem::path& path, Split split) {
  if (!std::filesystem::exists(path)) throw ConfigError("no such corpus '" + path.string() + "'");
  if (path.extension() == ".jsonl") return ReadDatasetJsonl(path, split);
  return LoadKarpathy(path, {}, split);
}

SkillSubset FilterBySkill(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon) {
  std::vector<ImageRef> images;
  std::vector<CaptionRecord> captions;
  std::vector<std::size_t> matched;
  for (std::size_t i = 0; i < dataset.images().size(); ++i) {
    const auto [first, last] = dataset.CaptionRange(i);
    std::vector<std::size_t> hits;
    for (std::size_t c = first; c < last; ++c) {
      if (Detect(dataset.captions()[c].text, skill, lexicon).fired()) hits.push_back(c - first);
    }
    if (hits.empty()) continue;
    images.push_back(dataset.images()[i]);
    const std::size_t base = captions.size();
    for (std::size_t c = first; c < last; ++c) captions.push_back(dataset.captions()[c]);
    for (std::size_t h : hits) matched.push_back(base + h);
  }
  // Input order is already (image_id, ref_index), so the indices stay valid
  // after the constructor's sort.
  return {Dataset(dataset.split(), std::move(images), std::move(captions)), std::move(matched)};
}

}  // namespace tida
