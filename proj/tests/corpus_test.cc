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

#include <gtest/gtest.h>

#include <sstream>

#include "support/oracles.h"
#include "support/test_support.h"
#include "tida/error.h"

namespace tida {
namespace {

const char kSplitFile[] = R"({"images": [
  {"filename": "COCO_val_0001.jpg", "filepath": "val2014", "split": "test",
   "sentences": [{"raw": "A man riding a  horse."}, {"raw": "Someone on a horse"}]},
  {"filename": "COCO_val_0002.jpg", "filepath": "val2014", "split": "train",
   "sentences": [{"raw": "Two red apples."}]},
  {"filename": "COCO_val_0003.jpg", "split": "test",
   "sentences": [{"tokens": ["a", "blue", "car"]}]},
  {"filename": "COCO_val_0004.jpg", "split": "restval",
   "sentences": [{"raw": "A cat."}]}
]})";

TEST(KarpathyTest, KeepsRequestedSplit) {
  const Dataset test = ParseKarpathy(kSplitFile, Split::kTest);
  ASSERT_EQ(test.images().size(), 2u);
  EXPECT_EQ(test.images()[0].image_id, "COCO_val_0001");
  EXPECT_EQ(test.images()[0].file_path, "val2014/COCO_val_0001.jpg");
  EXPECT_EQ(test.images()[1].file_path, "COCO_val_0003.jpg");
  ASSERT_EQ(test.captions().size(), 3u);
  EXPECT_EQ(test.captions()[0].text, "A man riding a horse.");
  EXPECT_EQ(test.captions()[2].text, "a blue car");
  EXPECT_EQ(test.CaptionTexts(0).size(), 2u);

  const Dataset train = ParseKarpathy(kSplitFile, Split::kTrain);
  ASSERT_EQ(train.images().size(), 1u);
  EXPECT_EQ(train.captions()[0].text, "Two red apples.");
  EXPECT_TRUE(ParseKarpathy(kSplitFile, Split::kVal).images().empty());
}

TEST(KarpathyTest, EmptyFileGivesEmptyDataset) {
  testing::TempDir dir("karpathy_empty");
  testing::WriteText(dir / "split.json", "");
  const Dataset d = LoadKarpathy(dir / "split.json", {}, Split::kTrain);
  EXPECT_TRUE(d.images().empty());
  EXPECT_TRUE(d.captions().empty());
}

TEST(KarpathyTest, MalformedJsonReportsOffset) {
  testing::TempDir dir("karpathy_bad");
  testing::WriteText(dir / "split.json", R"({"images": [ {"filename": "a.jpg",, }]})");
  try {
    LoadKarpathy(dir / "split.json", {}, Split::kTrain);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.byte_offset(), 34u);  // the second comma
  }
}

TEST(KarpathyTest, MissingFileIsConfigError) {
  EXPECT_THROW(LoadKarpathy("/nonexistent/split.json", {}, Split::kTrain), Error);
}

TEST(KarpathyTest, ExternalCaptionsJsonl) {
  testing::TempDir dir("karpathy_ext");
  testing::WriteText(dir / "split.json", kSplitFile);
  testing::WriteText(dir / "caps.jsonl",
                     "{\"image_id\": \"COCO_val_0001\", \"ref_index\": 1, \"text\": \"b\"}\n"
                     "{\"image_id\": \"COCO_val_0001\", \"ref_index\": 0, \"text\": \"a\"}\n"
                     "{\"image_id\": \"COCO_val_0003\", \"ref_index\": 0, \"text\": \"c\"}\n"
                     "{\"image_id\": \"COCO_val_0002\", \"ref_index\": 0, \"text\": \"d\"}\n");
  const Dataset d = LoadKarpathy(dir / "split.json", dir / "caps.jsonl", Split::kTest);
  ASSERT_EQ(d.captions().size(), 3u);
  EXPECT_EQ(d.captions()[0].text, "a");
  EXPECT_EQ(d.captions()[1].text, "b");
  EXPECT_EQ(d.captions()[2].text, "c");
}

TEST(KarpathyTest, ExternalCaptionsMap) {
  testing::TempDir dir("karpathy_map");
  testing::WriteText(dir / "split.json", kSplitFile);
  testing::WriteText(dir / "caps.json",
                     R"({"COCO_val_0001": ["x", "y"], "COCO_val_0003": ["z"]})");
  const Dataset d = LoadKarpathy(dir / "split.json", dir / "caps.json", Split::kTest);
  ASSERT_EQ(d.captions().size(), 3u);
  EXPECT_EQ(d.captions()[1].ref_index, 1);
  EXPECT_EQ(d.captions()[1].text, "y");
}

TEST(KarpathyTest, CaptionForUnknownImageIsIntegrityError) {
  testing::TempDir dir("karpathy_unknown");
  testing::WriteText(dir / "split.json", kSplitFile);
  testing::WriteText(dir / "caps.json", R"({"COCO_val_0001": ["x"], "COCO_val_9999": ["z"]})");
  EXPECT_THROW(LoadKarpathy(dir / "split.json", dir / "caps.json", Split::kTest), IntegrityError);
}

TEST(DatasetTest, RejectsBrokenInvariants) {
  EXPECT_THROW(Dataset(Split::kTrain, {{"a", std::nullopt}, {"a", std::nullopt}},
                       {{"a", 0, "x"}}),
               IntegrityError);
  EXPECT_THROW(Dataset(Split::kTrain, {{"a", std::nullopt}}, {{"b", 0, "x"}}), IntegrityError);
  EXPECT_THROW(Dataset(Split::kTrain, {{"a", std::nullopt}}, {{"a", 0, "x"}, {"a", 0, "y"}}),
               IntegrityError);
  EXPECT_THROW(Dataset(Split::kTrain, {{"a", std::nullopt}}, {{"a", 0, "   "}}), IntegrityError);
  EXPECT_THROW(Dataset(Split::kTrain, {{"a", std::nullopt}, {"b", std::nullopt}},
                       {{"a", 0, "x"}}),
               IntegrityError);
}

TEST(DatasetTest, SortsAndIndexes) {
  const Dataset d(Split::kTrain, {{"b", "b.jpg"}, {"a", std::nullopt}},
                  {{"b", 1, "b1"}, {"a", 0, "a0"}, {"b", 0, "b0"}});
  EXPECT_EQ(d.images()[0].image_id, "a");
  EXPECT_EQ(d.CaptionTexts(1), (std::vector<std::string>{"b0", "b1"}));
  EXPECT_EQ(d.FindImage("b"), 1u);
  EXPECT_FALSE(d.FindImage("c").has_value());
}

TEST(DatasetJsonlTest, RoundTrip) {
  const Dataset original = testing::SyntheticCorpus(40, 9);
  std::stringstream buf;
  WriteDatasetJsonl(original, buf);
  const Dataset back = ReadDatasetJsonl(buf, Split::kTrain);
  EXPECT_EQ(back, original);

  testing::TempDir dir("jsonl_rt");
  WriteDatasetJsonl(original, dir / "d.jsonl");
  EXPECT_EQ(LoadCorpus(dir / "d.jsonl", Split::kTrain), original);
}

TEST(DatasetJsonlTest, NullFilePathSurvives) {
  const Dataset d(Split::kTest, {{"a", std::nullopt}}, {{"a", 0, "x"}});
  std::stringstream buf;
  WriteDatasetJsonl(d, buf);
  EXPECT_NE(buf.str().find("\"file_path\":null"), std::string::npos);
  EXPECT_EQ(ReadDatasetJsonl(buf, Split::kTest), d);
}

TEST(DatasetJsonlTest, BadLineReportsOffset) {
  std::stringstream buf("{\"image_id\": \"a\", \"ref_index\": 0, \"text\": \"x\"}\n{oops\n");
  try {
    ReadDatasetJsonl(buf, Split::kTrain);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 40u);
  }
}

TEST(FilterBySkillTest, ToyCorpusCounts) {
  const auto lex = SkillLexicon::Default();
  const Dataset toy = testing::ToyCorpus();
  struct Expect {
    Skill skill;
    std::size_t images;
    std::size_t captions;
  };
  for (const Expect& e : {Expect{Skill::kGender, 9, 15}, Expect{Skill::kColor, 5, 6},
                          Expect{Skill::kCounting, 5, 7}}) {
    const auto subset = FilterBySkill(toy, e.skill, lex);
    EXPECT_EQ(subset.dataset.images().size(), e.images) << SkillName(e.skill);
    EXPECT_EQ(subset.matched_captions.size(), e.captions) << SkillName(e.skill);
    EXPECT_EQ(subset.dataset.captions().size(), 5 * e.images);
  }
  EXPECT_FALSE(FilterBySkill(toy, Skill::kGender, lex).dataset.FindImage("img0010"));
}

// Brute force over a synthetic corpus: an image is kept iff the ASCII word
// oracle finds a lexicon word in one of its references.
TEST(FilterBySkillTest, MatchesOracleAndIsIdempotent) {
  const auto lex = SkillLexicon::Default();
  const Dataset corpus = testing::SyntheticCorpus(300, 77);
  std::set<std::string> male_or_female = testing::OracleMaleWords();
  male_or_female.insert(testing::OracleFemaleWords().begin(), testing::OracleFemaleWords().end());
  const std::vector<std::pair<Skill, std::set<std::string>>> cases = {
      {Skill::kGender, male_or_female},
      {Skill::kColor, testing::OracleColorWords()},
      {Skill::kCounting, testing::OracleNumberWords()}};
  for (const auto& [skill, words] : cases) {
    std::set<std::string> expected;
    std::size_t expected_captions = 0;
    for (const auto& c : corpus.captions()) {
      if (testing::OracleHasAny(c.text, words)) {
        expected.insert(c.image_id);
        ++expected_captions;
      }
    }
    const auto subset = FilterBySkill(corpus, skill, lex);
    std::set<std::string> got;
    for (const auto& img : subset.dataset.images()) got.insert(img.image_id);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(subset.matched_captions.size(), expected_captions);
    for (std::size_t idx : subset.matched_captions) {
      EXPECT_TRUE(testing::OracleHasAny(subset.dataset.captions()[idx].text, words));
    }
    // Subset of the input, and filtering twice changes nothing.
    for (const auto& img : subset.dataset.images()) {
      const auto at = corpus.FindImage(img.image_id);
      ASSERT_TRUE(at);
      EXPECT_EQ(subset.dataset.CaptionTexts(*subset.dataset.FindImage(img.image_id)),
                corpus.CaptionTexts(*at));
    }
    EXPECT_EQ(FilterBySkill(subset.dataset, skill, lex).dataset, subset.dataset);
  }
}

TEST(FilterBySkillTest, EmptyDataset) {
  const auto subset = FilterBySkill(Dataset(), Skill::kColor, SkillLexicon::Default());
  EXPECT_TRUE(subset.dataset.images().empty());
  EXPECT_TRUE(subset.matched_captions.empty());
}

}  // namespace
}  // namespace tida
