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

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sceneqa/corpus/types.hpp"

namespace sceneqa::metrics {

inline constexpr int kMaxOrder = 4;

// n-gram -> count, one map per order (index 0 holds unigrams).
using NGramCounts = std::array<std::unordered_map<std::string, int>, kMaxOrder>;

inline std::string ngram_key(const TokenList& tokens, std::size_t start, std::size_t n) {
  std::string key = tokens[start];
  for (std::size_t i = start + 1; i < start + n; ++i) {
    key.push_back('\x1f');
    key += tokens[i];
  }
  return key;
}

inline NGramCounts count_ngrams(const TokenList& tokens, int max_order = kMaxOrder) {
  NGramCounts counts;
  for (int n = 1; n <= max_order; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      ++counts[static_cast<std::size_t>(n - 1)][ngram_key(tokens, i, static_cast<std::size_t>(n))];
    }
  }
  return counts;
}

// Document frequencies over a reference corpus; a reference set is one
// document. Immutable once built.
class NGramStats {
 public:
  NGramStats() = default;
  NGramStats(std::unordered_map<std::string, int> df, int num_docs)
      : df_(std::move(df)), num_docs_(num_docs) {}

  int num_docs() const { return num_docs_; }
  int document_frequency(const std::string& key) const {
    auto it = df_.find(key);
    return it == df_.end() ? 0 : it->second;
  }
  int document_frequency(const TokenList& ngram) const {
    return document_frequency(ngram_key(ngram, 0, ngram.size()));
  }
  const std::unordered_map<std::string, int>& table() const { return df_; }

 private:
  std::unordered_map<std::string, int> df_;
  int num_docs_ = 0;
};

inline NGramStats build_idf(const std::vector<std::vector<TokenList>>& reference_sets) {
  if (reference_sets.empty()) throw std::invalid_argument("build_idf: no reference sets");
  std::unordered_map<std::string, int> df;
  for (const auto& refs : reference_sets) {
    std::unordered_set<std::string> seen;
    for (const auto& r : refs) {
      const NGramCounts c = count_ngrams(r);
      for (const auto& order : c) {
        for (const auto& [key, cnt] : order) seen.insert(key);
      }
    }
    for (const auto& key : seen) ++df[key];
  }
  return NGramStats(std::move(df), static_cast<int>(reference_sets.size()));
}

}  // namespace sceneqa::metrics
