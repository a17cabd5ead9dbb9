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

#include "tida/probe.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "tida/error.h"
#include "tida/random.h"

namespace tida {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'T', 'I', 'D', 'A', 'E', 'M', 'B', '1'};

uint32_t ReadU32Le(std::istream& in, bool& ok) {
  unsigned char b[4];
  ok = static_cast<bool>(in.read(reinterpret_cast<char*>(b), 4));
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void WriteU32Le(std::ostream& out, uint32_t v) {
  const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 24)};
  out.write(b, 4);
}

std::vector<EmbeddingRecord> ReadBinary(std::istream& in, const std::string& what) {
  bool ok = false;
  const uint32_t dim = ReadU32Le(in, ok);
  if (!ok || dim == 0) throw ParseError(what + ": bad embedding header");
  std::vector<EmbeddingRecord> out;
  while (true) {
    const uint32_t id_len = ReadU32Le(in, ok);
    if (!ok) {
      if (in.gcount() == 0) break;
      throw ParseError(what + ": truncated record header");
    }
    EmbeddingRecord rec;
    rec.image_id.resize(id_len);
    if (!in.read(rec.image_id.data(), id_len)) throw ParseError(what + ": truncated image id");
    rec.vector.resize(dim);
    for (uint32_t i = 0; i < dim; ++i) {
      const uint32_t bits = ReadU32Le(in, ok);
      if (!ok) throw ParseError(what + ": truncated vector for '" + rec.image_id + "'");
      rec.vector[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EmbeddingRecord> ReadJsonl(std::istream& in, const std::string& what) {
  std::vector<EmbeddingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      out.push_back({rec.at("image_id").get<std::string>(),
                     rec.at("vector").get<std::vector<double>>()});
    } catch (const json::exception& e) {
      throw ParseError(what + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void CheckEmbeddings(std::span<const EmbeddingRecord> records, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (rec.vector.size() != records.front().vector.size() || rec.vector.empty()) {
      throw IntegrityError(what + ": embedding for '" + rec.image_id + "' has dimension " +
                           std::to_string(rec.vector.size()) + ", expected " +
                           std::to_string(records.front().vector.size()));
    }
    for (double v : rec.vector) {
      if (!std::isfinite(v)) {
        throw IntegrityError(what + ": non-finite component for '" + rec.image_id + "'");
      }
    }
    if (!seen.insert(rec.image_id).second) {
      throw IntegrityError(what + ": duplicate embedding for '" + rec.image_id + "'");
    }
  }
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Activate(double v, Activation a) { return a == Activation::kRelu ? std::max(0.0, v) : v; }

double ActivateGrad(double pre, Activation a) {
  return a == Activation::kRelu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0;
}

// Forward pass keeping the pre-activations for backprop.
double Logit(std::span<const double> x, const MlpParams& p, Activation a,
             std::vector<double>& pre, std::vector<double>& hidden) {
  pre.resize(p.hidden);
  hidden.resize(p.hidden);
  double logit = p.b2;
  for (int j = 0; j < p.hidden; ++j) {
    const double* row = p.w1.data() + static_cast<std::size_t>(j) * p.input_dim;
    double s = p.b1[j];
    for (int i = 0; i < p.input_dim; ++i) s += row[i] * x[i];
    pre[j] = s;
    hidden[j] = Activate(s, a);
    logit += p.w2[j] * hidden[j];
  }
  return logit;
}

// Adds scale * d(loss)/d(params) for one example into `grad`; returns the loss.
double Accumulate(std::span<const double> x, int y, const MlpParams& p, Activation a,
                  MlpParams& grad, double scale, std::vector<double>& pre,
                  std::vector<double>& hidden) {
  const double prob = Sigmoid(Logit(x, p, a, pre, hidden));
  const double dlogit = (prob - y) * scale;
  grad.b2 += dlogit;
  for (int j = 0; j < p.hidden; ++j) {
    grad.w2[j] += dlogit * hidden[j];
    const double dpre = dlogit * p.w2[j] * ActivateGrad(pre[j], a);
    if (dpre == 0.0) continue;
    grad.b1[j] += dpre;
    double* grow = grad.w1.data() + static_cast<std::size_t>(j) * p.input_dim;
    for (int i = 0; i < p.input_dim; ++i) grow[i] += dpre * x[i];
  }
  return BceLoss(prob, y);
}

double MeanLoss(std::span<const EmbeddingRecord> emb, std::span<const int> labels,
                std::span<const std::size_t> idx, const MlpParams& p, Activation a) {
  if (idx.empty()) return 0.0;
  std::vector<double> pre, hidden;
  double sum = 0.0;
  for (std::size_t i : idx) {
    sum += BceLoss(Sigmoid(Logit(emb[i].vector, p, a, pre, hidden)), labels[i]);
  }
  return sum / static_cast<double>(idx.size());
}

uint64_t CellSeed(uint64_t seed, int hidden, double lr) {
  return SplitMix64(seed ^ SplitMix64(static_cast<uint64_t>(hidden)) ^
                    SplitMix64(std::bit_cast<uint64_t>(lr)));
}

void CheckSplits(const ProbeSplits& splits, std::size_t n) {
  std::vector<char> owner(n, 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (std::size_t i : *part) {
      if (i >= n) throw ConfigError("probe split index out of range");
      if (owner[i]) throw ConfigError("probe splits overlap");
      owner[i] = 1;
    }
  }
  if (splits.train.empty()) throw ConfigError("probe: empty training split");
  if (splits.val.empty()) throw ConfigError("probe: empty validation split");
}

}  // namespace

std::vector<EmbeddingRecord> ReadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open embeddings '" + path.string() + "'");
  char magic[8] = {};
  in.read(magic, 8);
  std::vector<EmbeddingRecord> out;
  if (in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0) {
    out = ReadBinary(in, path.string());
  } else {
    in.clear();
    in.seekg(0);
    out = ReadJsonl(in, path.string());
  }
  CheckEmbeddings(out, path.string());
  return out;
}

void WriteEmbeddingsJsonl(std::span<const EmbeddingRecord> records,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  for (const auto& rec : records) {
    out << json{{"image_id", rec.image_id}, {"vector", rec.vector}}.dump() << '\n';
  }
}

void WriteEmbeddingsBinary(std::span<const EmbeddingRecord> records,
                           const std::filesystem::path& path) {
  if (records.empty()) throw ConfigError("no embeddings to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.write(kMagic, 8);
  WriteU32Le(out, static_cast<uint32_t>(records.front().vector.size()));
  for (const auto& rec : records) {
    WriteU32Le(out, static_cast<uint32_t>(rec.image_id.size()));
    out.write(rec.image_id.data(), static_cast<std::streamsize>(rec.image_id.size()));
    for (double v : rec.vector) WriteU32Le(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
}

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view ActivationName(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "identity";
}

MlpParams MlpParams::Zeros(int input_dim, int hidden) {
  if (input_dim <= 0 || hidden <= 0) throw ConfigError("MLP dimensions must be positive");
  MlpParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.w1.assign(static_cast<std::size_t>(input_dim) * hidden, 0.0);
  p.b1.assign(hidden, 0.0);
  p.w2.assign(hidden, 0.0);
  return p;
}

MlpParams MlpParams::Init(int input_dim, int hidden, uint64_t seed) {
  MlpParams p = Zeros(input_dim, hidden);
  Rng rng(seed);
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double out_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : p.w1) w = rng.UniformReal(-in_bound, in_bound);
  for (auto& b : p.b1) b = rng.UniformReal(-in_bound, in_bound);
  for (auto& w : p.w2) w = rng.UniformReal(-out_bound, out_bound);
  p.b2 = rng.UniformReal(-out_bound, out_bound);
  return p;
}

std::vector<double> MlpParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

void MlpParams::Unflatten(std::span<const double> flat) {
  if (flat.size() != size()) throw ConfigError("parameter vector has the wrong length");
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

void MlpParams::CheckShape() const {
  if (input_dim <= 0 || hidden <= 0 ||
      w1.size() != static_cast<std::size_t>(input_dim) * hidden ||
      b1.size() != static_cast<std::size_t>(hidden) || w2.size() != static_cast<std::size_t>(hidden)) {
    throw ConfigError("MLP parameter shapes are inconsistent");
  }
}

double MlpForward(std::span<const double> x, const MlpParams& params, Activation activation) {
  params.CheckShape();
  if (x.size() != static_cast<std::size_t>(params.input_dim)) {
    throw ConfigError("input has dimension " + std::to_string(x.size()) + ", MLP expects " +
                      std::to_string(params.input_dim));
  }
  std::vector<double> pre, hidden;
  return Sigmoid(Logit(x, params, activation, pre, hidden));
}

double BceLoss(double p, int y) {
  p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

LossAndGrad BceLossAndGrad(std::span<const double> x, int y, const MlpParams& params,
                           Activation activation) {
  params.CheckShape();
  if (x.size() != static_cast<std::size_t>(params.input_dim)) {
    throw ConfigError("input dimension does not match the MLP");
  }
  LossAndGrad out;
  out.grad = MlpParams::Zeros(params.input_dim, params.hidden);
  std::vector<double> pre, hidden;
  out.loss = Accumulate(x, y, params, activation, out.grad, 1.0, pre, hidden);
  return out;
}

bool EarlyStopping::Update(double loss) {
  if (!seen_ || loss < best_) {
    seen_ = true;
    best_ = loss;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

void ProbeConfig::Validate() const {
  if (hidden_sizes.empty() || learning_rates.empty()) throw ConfigError("probe grid is empty");
  for (int h : hidden_sizes) {
    if (h <= 0) throw ConfigError("hidden sizes must be positive");
  }
  for (double lr : learning_rates) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (patience <= 0 || max_epochs <= 0 || batch_size <= 0) {
    throw ConfigError("patience, max_epochs and batch_size must be positive");
  }
}

ProbeSplits RandomSplits(std::size_t n, double val_fraction, double test_fraction, uint64_t seed) {
  if (val_fraction < 0 || test_fraction < 0 || val_fraction + test_fraction >= 1.0) {
    throw ConfigError("split fractions must be non-negative and sum to less than 1");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::round(val_fraction * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::round(test_fraction * static_cast<double>(n)));
  ProbeSplits splits;
  splits.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  splits.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                     order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  splits.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), order.end());
  return splits;
}

TrainedProbe TrainSingle(std::span<const EmbeddingRecord> embeddings, std::span<const int> labels,
                         const ProbeSplits& splits, int hidden, double learning_rate,
                         const ProbeConfig& config) {
  const int dim = static_cast<int>(embeddings.front().vector.size());
  const uint64_t seed = CellSeed(config.seed, hidden, learning_rate);
  MlpParams params = MlpParams::Init(dim, hidden, seed);
  Rng order_rng(SplitMix64(seed));

  TrainedProbe out;
  out.params = params;
  out.best_val_loss = std::numeric_limits<double>::infinity();
  EarlyStopping stopper(config.patience);
  std::vector<std::size_t> order = splits.train;
  MlpParams grad = MlpParams::Zeros(dim, hidden);
  std::vector<double> pre, act;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.w1.begin(), grad.w1.end(), 0.0);
      std::fill(grad.b1.begin(), grad.b1.end(), 0.0);
      std::fill(grad.w2.begin(), grad.w2.end(), 0.0);
      grad.b2 = 0.0;
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Accumulate(embeddings[i].vector, labels[i], params, config.activation, grad, scale, pre,
                   act);
      }
      for (std::size_t k = 0; k < params.w1.size(); ++k) params.w1[k] -= learning_rate * grad.w1[k];
      for (int j = 0; j < hidden; ++j) {
        params.b1[j] -= learning_rate * grad.b1[j];
        params.w2[j] -= learning_rate * grad.w2[j];
      }
      params.b2 -= learning_rate * grad.b2;
    }

    const double val_loss = MeanLoss(embeddings, labels, splits.val, params, config.activation);
    out.val_loss_curve.push_back(val_loss);
    out.epochs_run = epoch;
    // NaN never improves, so a diverged run keeps its last good parameters.
    if (stopper.Update(std::isnan(val_loss) ? std::numeric_limits<double>::infinity() : val_loss) &&
        val_loss < out.best_val_loss) {
      out.best_val_loss = val_loss;
      out.params = params;
    }
    if (stopper.ShouldStop()) break;
  }
  return out;
}

ProbeResult TrainProbe(std::span<const EmbeddingRecord> embeddings,
                       const std::map<std::string, int>& labels, const ProbeConfig& config,
                       const ProbeSplits& splits) {
  config.Validate();
  if (embeddings.empty()) throw ConfigError("probe: no embeddings");
  CheckEmbeddings(embeddings, "probe");
  CheckSplits(splits, embeddings.size());

  std::vector<int> y(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    auto it = labels.find(embeddings[i].image_id);
    if (it == labels.end()) {
      throw IntegrityError("no label for image '" + embeddings[i].image_id + "'");
    }
    if (it->second != 0 && it->second != 1) {
      throw IntegrityError("label for '" + embeddings[i].image_id + "' is not 0 or 1");
    }
    y[i] = it->second;
  }
  std::size_t train_pos = 0;
  for (std::size_t i : splits.train) train_pos += static_cast<std::size_t>(y[i]);
  if (train_pos == 0 || train_pos == splits.train.size()) {
    throw DegenerateLabels("training labels contain a single class");
  }

  // Cells in lexicographic (hidden, lr) order; the argmin keeps the first.
  std::vector<std::pair<int, double>> cells;
  for (int h : config.hidden_sizes) {
    for (double lr : config.learning_rates) cells.emplace_back(h, lr);
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  std::vector<TrainedProbe> trained(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1)) {
      trained[c] = TrainSingle(embeddings, y, splits, cells[c].first, cells[c].second, config);
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  ProbeResult result;
  std::size_t best = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    result.grid.push_back({cells[c].first, cells[c].second, trained[c].best_val_loss,
                           trained[c].epochs_run});
    if (trained[c].best_val_loss < trained[best].best_val_loss) best = c;
  }
  const TrainedProbe& chosen = trained[best];
  result.best_hidden = cells[best].first;
  result.best_lr = cells[best].second;
  result.epochs_run = chosen.epochs_run;
  result.best_val_loss = chosen.best_val_loss;
  result.val_loss_curve = chosen.val_loss_curve;

  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i : splits.test) {
    const bool predicted = MlpForward(embeddings[i].vector, chosen.params, config.activation) >= 0.5;
    const bool truth = y[i] == 1;
    if (predicted && truth) ++tp;
    else if (predicted) ++fp;
    else if (truth) ++fn;
    else ++tn;
  }
  auto pct = [](std::size_t num, std::size_t den) {
    return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  auto hm = [](double a, double b) { return a + b > 0 ? 2 * a * b / (a + b) : 0.0; };
  result.precision = pct(tp, tp + fp);
  result.recall = pct(tp, tp + fn);
  result.f1 = hm(result.precision, result.recall);
  result.precision_neg = pct(tn, tn + fn);
  result.recall_neg = pct(tn, tn + fp);
  result.f1_neg = hm(result.precision_neg, result.recall_neg);
  result.f1_macro = (result.f1 + result.f1_neg) / 2.0;
  return result;
}

json ProbeResult::ToJson() const {
  json grid_json = json::array();
  for (const auto& cell : grid) {
    grid_json.push_back({{"hidden", cell.hidden},
                         {"learning_rate", cell.learning_rate},
                         {"best_val_loss", cell.best_val_loss},
                         {"epochs_run", cell.epochs_run}});
  }
  return {{"best_hidden", best_hidden},
          {"best_lr", best_lr},
          {"positive", {{"precision", precision}, {"recall", recall}, {"f1", f1}}},
          {"negative", {{"precision", precision_neg}, {"recall", recall_neg}, {"f1", f1_neg}}},
          {"f1_macro", f1_macro},
          {"epochs_run", epochs_run},
          {"best_val_loss", best_val_loss},
          {"val_loss_curve", val_loss_curve},
          {"grid", grid_json}};
}

ProbeDataset BuildProbeDataset(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon,
                               std::span<const EmbeddingRecord> embeddings) {
  std::map<std::string_view, const EmbeddingRecord*> by_id;
  for (const auto& rec : embeddings) by_id[rec.image_id] = &rec;
  ProbeDataset out;
  for (std::size_t i = 0; i < dataset.images().size(); ++i) {
    const std::string& id = dataset.images()[i].image_id;
    auto it = by_id.find(id);
    if (it == by_id.end()) throw IntegrityError("no embedding for image '" + id + "'");
    out.embeddings.push_back(*it->second);
    out.labels[id] = ImageHasSkill(dataset.CaptionTexts(i), skill, lexicon) ? 1 : 0;
  }
  return out;
}

ProbeDataset BuildProbeDataset(const Dataset& dataset, Skill skill, const SkillLexicon& lexicon,
                               const std::filesystem::path& embeddings_file) {
  const auto embeddings = ReadEmbeddings(embeddings_file);
  return BuildProbeDataset(dataset, skill, lexicon, embeddings);
}

}  // namespace tida
