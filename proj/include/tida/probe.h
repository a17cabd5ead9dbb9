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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tida/corpus.h"
#include "tida/skills.h"

namespace tida {

struct EmbeddingRecord {
  std::string image_id;
  std::vector<double> vector;
};

// Reads JSONL ({"image_id", "vector": [...]}) or the binary layout: magic
// "TIDAEMB1", little-endian u32 dimension, then per record a u32 id length,
// the id bytes and `dimension` little-endian float32 values. The format is
// chosen by sniffing the magic bytes. All vectors must share one dimension
// and contain only finite values.
std::vector<EmbeddingRecord> ReadEmbeddings(const std::filesystem::path& path);
void WriteEmbeddingsJsonl(std::span<const EmbeddingRecord> records,
                          const std::filesystem::path& path);
void WriteEmbeddingsBinary(std::span<const EmbeddingRecord> records,
                           const std::filesystem::path& path);

enum class Activation { kRelu, kIdentity };

Activation ParseActivation(std::string_view name);
std::string_view ActivationName(Activation activation);

// One hidden layer and a scalar logit. w1 is hidden x input, row-major.
struct MlpParams {
  int input_dim = 0;
  int hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  static MlpParams Zeros(int input_dim, int hidden);
  // Every weight and bias uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpParams Init(int input_dim, int hidden, uint64_t seed);

  std::size_t size() const { return w1.size() + b1.size() + w2.size() + 1; }
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);
  // Throws ConfigError unless every array matches input_dim and hidden.
  void CheckShape() const;
};

// sigmoid(w2 . act(W1 x + b1) + b2).
double MlpForward(std::span<const double> x, const MlpParams& params, Activation activation);

inline constexpr double kBceEpsilon = 1e-12;

// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [eps, 1 - eps].
double BceLoss(double p, int y);

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};

// Loss of one example and its gradient with respect to every parameter.
LossAndGrad BceLossAndGrad(std::span<const double> x, int y, const MlpParams& params,
                           Activation activation);

// Tracks validation loss and decides when to stop. The first Update always
// counts as an improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `loss` is a new best.
  bool Update(double loss);
  bool ShouldStop() const { return since_best_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  int since_best_ = 0;
  bool seen_ = false;
  double best_ = 0.0;
};

struct ProbeConfig {
  std::vector<int> hidden_sizes = {16, 64, 256};
  std::vector<double> learning_rates = {1e-1, 1e-2, 1e-3};
  int patience = 5;
  int max_epochs = 100;
  int batch_size = 32;
  uint64_t seed = 0;
  Activation activation = Activation::kRelu;
  // Grid cells trained concurrently; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void Validate() const;
};

// Indices into the embedding list.
struct ProbeSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Shuffles [0, n) with `seed` and cuts it into val, test and train parts.
ProbeSplits RandomSplits(std::size_t n, double val_fraction, double test_fraction, uint64_t seed);

struct GridCell {
  int hidden = 0;
  double learning_rate = 0.0;
  double best_val_loss = 0.0;
  int epochs_run = 0;
};

struct ProbeResult {
  int best_hidden = 0;
  double best_lr = 0.0;
  // Positive class, percentages at threshold 0.5.
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // Negative class and the macro average of both F1 scores.
  double precision_neg = 0.0, recall_neg = 0.0, f1_neg = 0.0, f1_macro = 0.0;
  int epochs_run = 0;
  double best_val_loss = 0.0;
  std::vector<double> val_loss_curve;  // selected cell, one entry per epoch
  std::vector<GridCell> grid;

  nlohmann::json ToJson() const;
};

// One training run: mini-batch gradient descent at a fixed learning rate,
// early stopping on validation loss, best-epoch parameters retained.
struct TrainedProbe {
  MlpParams params;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  std::vector<double> val_loss_curve;
};

TrainedProbe TrainSingle(std::span<const EmbeddingRecord> embeddings, std::span<const int> labels,
                         const ProbeSplits& splits, int hidden, double learning_rate,
                         const ProbeConfig& config);

// Grid search over (hidden, learning rate); the lowest validation loss wins,
// ties going to the lexicographically smallest cell. Throws DegenerateLabels
// when the training labels are all one class.
ProbeResult TrainProbe(std::span<const EmbeddingRecord> embeddings,
                       const std::map<std::string, int>& labels, const ProbeConfig& config,
                       const ProbeSplits& splits);

struct ProbeDataset {
  std::vector<EmbeddingRecord> embeddings;  // dataset image order
  std::map<std::string, int> labels;
};

// Labels each image of `dataset` with ImageHasSkill over its references and
// attaches its embedding.
ProbeDataset BuildProbeDataset(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon,
                               const std::filesystem::path& embeddings_file);
ProbeDataset BuildProbeDataset(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon,
                               std::span<const EmbeddingRecord> embeddings);

}  // namespace tida
