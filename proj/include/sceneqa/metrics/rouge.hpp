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
#include <vector>

#include "sceneqa/metrics/score.hpp"
#include "sceneqa/corpus/types.hpp"

namespace sceneqa::metrics {

inline std::size_t lcs_length(const TokenList& a, const TokenList& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ROUGE-L F-measure, coco-caption flavour: the best precision and the best
// recall over references are combined with beta = 1.2.
inline double rouge_l_value(const TokenList& candidate, const std::vector<TokenList>& references,
                            double beta = 1.2) {
  if (candidate.empty() || references.empty()) return 0.0;
  double best_p = 0.0;
  double best_r = 0.0;
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(ref, candidate));
    best_p = std::max(best_p, lcs / static_cast<double>(candidate.size()));
    best_r = std::max(best_r, lcs / static_cast<double>(ref.size()));
  }
  if (best_p == 0.0 || best_r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return ((1.0 + b2) * best_p * best_r) / (best_r + b2 * best_p);
}

inline Score rouge_l(const TokenList& candidate, const std::vector<TokenList>& references) {
  return Score{Metric::kRougeL, rouge_l_value(candidate, references)};
}

}  // namespace sceneqa::metrics
