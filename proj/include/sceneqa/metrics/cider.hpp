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

#include <cmath>
#include <vector>

#include "sceneqa/metrics/ngrams.hpp"
#include "sceneqa/metrics/score.hpp"

namespace sceneqa::metrics {

// CIDEr-D as in the coco-caption evaluation server: tf-idf vectors per
// n-gram order (1..4), clipped dot product, gaussian length penalty
// (sigma 6), averaged over orders and references, scaled by 10.
struct CiderOptions {
  double sigma = 6.0;
  double scale = 10.0;
};

namespace detail {

struct TfIdfVector {
  std::array<std::unordered_map<std::string, double>, kMaxOrder> weights;
  std::array<double, kMaxOrder> norm{};
  int length = 0;
};

inline TfIdfVector tfidf(const TokenList& tokens, const NGramStats& stats) {
  TfIdfVector v;
  const double log_docs = std::log(static_cast<double>(stats.num_docs()));
  const NGramCounts counts = count_ngrams(tokens);
  for (int n = 0; n < kMaxOrder; ++n) {
    for (const auto& [key, tf] : counts[static_cast<std::size_t>(n)]) {
      const double df = std::log(std::max(1.0, static_cast<double>(stats.document_frequency(key))));
      const double w = static_cast<double>(tf) * (log_docs - df);
      v.weights[static_cast<std::size_t>(n)].emplace(key, w);
      v.norm[static_cast<std::size_t>(n)] += w * w;
    }
    v.norm[static_cast<std::size_t>(n)] = std::sqrt(v.norm[static_cast<std::size_t>(n)]);
  }
  v.length = static_cast<int>(tokens.size());
  return v;
}

}  // namespace detail

inline double cider_value(const TokenList& candidate, const std::vector<TokenList>& references,
                          const NGramStats& stats, const CiderOptions& opt = {}) {
  if (candidate.empty() || references.empty() || stats.num_docs() == 0) return 0.0;
  const detail::TfIdfVector cv = detail::tfidf(candidate, stats);
  double total = 0.0;
  for (const auto& ref : references) {
    const detail::TfIdfVector rv = detail::tfidf(ref, stats);
    const double delta = static_cast<double>(cv.length - rv.length);
    const double penalty = std::exp(-(delta * delta) / (2.0 * opt.sigma * opt.sigma));
    double per_ref = 0.0;
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      double val = 0.0;
      for (const auto& [key, w] : cv.weights[n]) {
        auto it = rv.weights[n].find(key);
        if (it == rv.weights[n].end()) continue;
        val += std::min(w, it->second) * it->second;
      }
      if (cv.norm[n] != 0.0 && rv.norm[n] != 0.0) val /= cv.norm[n] * rv.norm[n];
      per_ref += val * penalty;
    }
    total += per_ref / kMaxOrder;
  }
  return opt.scale * total / static_cast<double>(references.size());
}

inline Score cider(const TokenList& candidate, const std::vector<TokenList>& references,
                   const NGramStats& stats, const CiderOptions& opt = {}) {
  return Score{Metric::kCider, cider_value(candidate, references, stats, opt)};
}

}  // namespace sceneqa::metrics
