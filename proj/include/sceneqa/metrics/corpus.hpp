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

#include <map>
#include <string>
#include <vector>

#include "sceneqa/core/errors.hpp"
#include "sceneqa/metrics/bleu.hpp"
#include "sceneqa/metrics/cider.hpp"
#include "sceneqa/metrics/rouge.hpp"

namespace sceneqa::metrics {

using Predictions = std::map<std::string, TokenList>;
using GoldReferences = std::map<std::string, std::vector<TokenList>>;
using Report = std::map<Metric, Score>;

// Corpus BLEU-1/4; per-item mean ROUGE-L and CIDEr-D, the latter with
// document frequencies taken from the gold references themselves.
inline Report score_corpus(const Predictions& predictions, const GoldReferences& gold) {
  std::vector<std::string> missing;
  for (const auto& [id, refs] : gold) {
    if (!predictions.count(id)) missing.push_back("missing prediction: " + id);
  }
  for (const auto& [id, toks] : predictions) {
    if (!gold.count(id)) missing.push_back("no references: " + id);
  }
  if (!missing.empty() || gold.empty()) {
    std::string msg = "prediction and reference ids differ";
    for (const auto& m : missing) msg += "\n  " + m;
    if (gold.empty()) msg = "no items to evaluate";
    throw EvaluationError(msg);
  }
  std::vector<std::vector<TokenList>> ref_sets;
  BleuStats bstats;
  for (const auto& [id, refs] : gold) {
    ref_sets.push_back(refs);
    accumulate_bleu(bstats, predictions.at(id), refs);
  }
  const NGramStats idf = build_idf(ref_sets);
  double rouge_sum = 0.0;
  double cider_sum = 0.0;
  for (const auto& [id, refs] : gold) {
    const TokenList& cand = predictions.at(id);
    rouge_sum += rouge_l_value(cand, refs);
    cider_sum += cider_value(cand, refs, idf);
  }
  const double n = static_cast<double>(gold.size());
  Report out;
  out[Metric::kBleu1] = Score{Metric::kBleu1, bleu_from_stats(bstats, 1)};
  out[Metric::kBleu4] = Score{Metric::kBleu4, bleu_from_stats(bstats, 4)};
  out[Metric::kRougeL] = Score{Metric::kRougeL, rouge_sum / n};
  out[Metric::kCider] = Score{Metric::kCider, cider_sum / n};
  return out;
}

}  // namespace sceneqa::metrics
