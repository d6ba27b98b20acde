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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "sceneqa/metrics/ngrams.hpp"
#include "sceneqa/metrics/score.hpp"

namespace sceneqa::metrics {

// Numerator/denominator floors of the coco-caption BLEU scorer. A zero
// precision at any order therefore yields a score near zero rather than NaN.
inline constexpr double kBleuTiny = 1e-15;
inline constexpr double kBleuSmall = 1e-9;

struct BleuStats {
  std::array<double, kMaxOrder> correct{};
  std::array<double, kMaxOrder> guess{};
  double candidate_length = 0.0;
  double reference_length = 0.0;  // closest reference length, summed
};

inline void accumulate_bleu(BleuStats& st, const TokenList& candidate, const std::vector<TokenList>& refs) {
  const int clen = static_cast<int>(candidate.size());
  int best = -1;
  for (const auto& r : refs) {
    const int rl = static_cast<int>(r.size());
    if (best < 0 || std::abs(rl - clen) < std::abs(best - clen) ||
        (std::abs(rl - clen) == std::abs(best - clen) && rl < best)) {
      best = rl;
    }
  }
  st.candidate_length += clen;
  st.reference_length += std::max(best, 0);
  const NGramCounts cc = count_ngrams(candidate);
  std::array<std::unordered_map<std::string, int>, kMaxOrder> max_ref;
  for (const auto& r : refs) {
    const NGramCounts rc = count_ngrams(r);
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      for (const auto& [k, c] : rc[n]) {
        int& m = max_ref[n][k];
        m = std::max(m, c);
      }
    }
  }
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    st.guess[n] += std::max(0, clen - static_cast<int>(n));
    for (const auto& [k, c] : cc[n]) {
      auto it = max_ref[n].find(k);
      if (it != max_ref[n].end()) st.correct[n] += std::min(c, it->second);
    }
  }
}

// BLEU-n (geometric mean of orders 1..n) from accumulated corpus statistics.
inline double bleu_from_stats(const BleuStats& st, int n) {
  if (n < 1 || n > kMaxOrder) throw std::invalid_argument("bleu: order must be in 1..4");
  double product = 1.0;
  for (int k = 0; k < n; ++k) {
    product *= (st.correct[static_cast<std::size_t>(k)] + kBleuTiny) /
               (st.guess[static_cast<std::size_t>(k)] + kBleuSmall);
  }
  double score = std::pow(product, 1.0 / n);
  const double ratio = (st.candidate_length + kBleuTiny) / (st.reference_length + kBleuSmall);
  if (ratio < 1.0) score *= std::exp(1.0 - 1.0 / ratio);
  return score;
}

inline Score bleu(const std::vector<TokenList>& candidates, const std::vector<std::vector<TokenList>>& reference_sets,
                  int n) {
  if (candidates.empty() || candidates.size() != reference_sets.size()) {
    throw std::invalid_argument("bleu: candidate and reference lists must be aligned and non-empty");
  }
  BleuStats st;
  for (std::size_t i = 0; i < candidates.size(); ++i) accumulate_bleu(st, candidates[i], reference_sets[i]);
  return Score{n == 1 ? Metric::kBleu1 : Metric::kBleu4, bleu_from_stats(st, n)};
}

}  // namespace sceneqa::metrics
