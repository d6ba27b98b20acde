/* Copyright 2026 The SceneQA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sceneqa/corpus/vocabulary.hpp"

namespace sceneqa {

inline constexpr int kEmbeddingDim = 300;

struct EmbeddingTable {
  Matrix<float> vectors;  // |V| x dim
  int dim = kEmbeddingDim;
  int rows() const { return static_cast<int>(vectors.rows()); }
};

// Seeded Gaussian rows (sigma 0.1); <pad> is the zero vector.
inline EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed,
                                        float sigma = 0.1f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, sigma);
  EmbeddingTable table;
  table.dim = dim;
  table.vectors.resize(vocab.size(), dim);
  for (int r = 0; r < vocab.size(); ++r) {
    for (int c = 0; c < dim; ++c) table.vectors(r, c) = normal(rng);
  }
  table.vectors.row(kPadId).setZero();
  return table;
}

// Reads whitespace-separated "word v_1 ... v_dim" lines (the GloVe text
// layout). Vocabulary tokens missing from the file receive the <unk> row,
// which itself is taken from the file when present and random otherwise.
inline EmbeddingTable load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                                                 int dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embedding file: " + path);
  EmbeddingTable table = random_embeddings(vocab, dim, seed);
  std::vector<bool> found(static_cast<std::size_t>(vocab.size()), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    if (!vocab.contains(word)) continue;
    const int id = vocab.id(word);
    for (int c = 0; c < dim; ++c) {
      float v;
      if (!(ss >> v)) {
        throw ParseError("embedding file " + path + " line " + std::to_string(line_no) +
                         ": expected " + std::to_string(dim) + " values");
      }
      table.vectors(id, c) = v;
    }
    found[static_cast<std::size_t>(id)] = true;
  }
  for (int id = kUnkId + 1; id < vocab.size(); ++id) {
    if (!found[static_cast<std::size_t>(id)]) table.vectors.row(id) = table.vectors.row(kUnkId);
  }
  table.vectors.row(kPadId).setZero();
  return table;
}

}  // namespace sceneqa
