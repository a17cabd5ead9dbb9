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

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tida/probe.h"
#include "tida/random.h"

namespace tida::testing {

struct Synthetic {
  std::vector<EmbeddingRecord> embeddings;
  std::map<std::string, int> labels;
};

inline double Gauss(Rng& rng) {
  const double u1 = rng.UniformReal(1e-12, 1.0), u2 = rng.UniformReal(0.0, 1.0);
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
}

// Standard normal points labelled by the side of a random hyperplane; points
// closer than `margin` to it are redrawn, so the classes are linearly
// separable. With `random_labels` the labels are coin flips instead.
inline Synthetic Separable(std::size_t n, int dim, double margin, uint64_t seed, bool random_labels) {
  Rng rng(seed);
  std::vector<double> dir(dim);
  double norm = 0;
  for (auto& v : dir) norm += (v = Gauss(rng)) * v;
  for (auto& v : dir) v /= std::sqrt(norm);
  Synthetic out;
  while (out.embeddings.size() < n) {
    EmbeddingRecord rec;
    double side = 0;
    for (int k = 0; k < dim; ++k) {
      rec.vector.push_back(Gauss(rng));
      side += rec.vector.back() * dir[k];
    }
    if (!random_labels && std::abs(side) < margin) continue;
    rec.image_id = "e" + std::to_string(out.embeddings.size());
    out.labels[rec.image_id] = random_labels ? static_cast<int>(rng.UniformIndex(2)) : side > 0;
    out.embeddings.push_back(std::move(rec));
  }
  return out;
}

}  // namespace tida::testing
