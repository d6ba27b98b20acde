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
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Core>

namespace sceneqa {

// A generated sequence. tokens excludes <start> and <end>; log_probs has one
// entry per emitted token, including the <end> step when it was emitted.
struct DecodeResult {
  std::vector<int> tokens;
  std::vector<double> log_probs;
  double total_log_prob = 0.0;
  bool ended = false;
};

struct BeamSet {
  int k = 0;
  std::vector<DecodeResult> results;  // best first
};

// A step function maps the tokens generated so far (without <start>) to
// log-probabilities over the vocabulary for the next token.
using LogProbs = Eigen::VectorXd;

template <typename StepFn>
DecodeResult greedy_search(StepFn&& step, int end_id, int max_len) {
  if (max_len < 1) throw std::invalid_argument("greedy_search: max_len must be >= 1");
  DecodeResult out;
  for (int t = 0; t < max_len; ++t) {
    const LogProbs lp = step(std::span<const int>(out.tokens));
    int best = 0;
    for (Eigen::Index i = 1; i < lp.size(); ++i) {
      if (lp(i) > lp(best)) best = static_cast<int>(i);
    }
    out.log_probs.push_back(lp(best));
    out.total_log_prob += lp(best);
    if (best == end_id) {
      out.ended = true;
      break;
    }
    out.tokens.push_back(best);
  }
  return out;
}

// Beam search on summed log-probabilities without length normalization.
// Each step keeps the k best expansions of the live hypotheses (ties go to
// the lower token id, then the lower beam index); expansions ending in <end>
// retire. Search stops once k hypotheses have retired and no live
// hypothesis can still overtake the k-th best, or at max_len, where live
// hypotheses retire truncated. Retired hypotheses with equal scores keep
// retirement order. Fewer than k results come back only when fewer than k
// sequences exist; a width covering every sequence makes the search exhaustive.
template <typename StepFn>
BeamSet beam_search(StepFn&& step, int end_id, int k, int max_len) {
  if (k < 1) throw std::invalid_argument("beam_search: k must be >= 1");
  if (max_len < 1) throw std::invalid_argument("beam_search: max_len must be >= 1");
  struct Hyp {
    DecodeResult r;
    long order = 0;
  };
  struct Candidate {
    double score;
    int token;
    int beam;
  };
  std::vector<Hyp> live(1);
  std::vector<Hyp> finished;
  long retired = 0;
  auto by_score = [](const Hyp& a, const Hyp& b) {
    if (a.r.total_log_prob != b.r.total_log_prob) return a.r.total_log_prob > b.r.total_log_prob;
    return a.order < b.order;
  };
  for (int t = 0; t < max_len && !live.empty(); ++t) {
    std::vector<LogProbs> dists;
    std::vector<Candidate> cands;
    for (std::size_t b = 0; b < live.size(); ++b) {
      dists.push_back(step(std::span<const int>(live[b].r.tokens)));
      const LogProbs& lp = dists.back();
      for (Eigen::Index v = 0; v < lp.size(); ++v) {
        if (lp(v) == -std::numeric_limits<double>::infinity()) continue;
        cands.push_back({live[b].r.total_log_prob + lp(v), static_cast<int>(v), static_cast<int>(b)});
      }
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return std::tie(b.score, a.token, a.beam) < std::tie(a.score, b.token, b.beam);
                      });
    std::vector<Hyp> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = cands[i];
      Hyp h = live[static_cast<std::size_t>(c.beam)];
      const double lp = dists[static_cast<std::size_t>(c.beam)](c.token);
      h.r.log_probs.push_back(lp);
      h.r.total_log_prob = c.score;
      if (c.token == end_id) {
        h.r.ended = true;
        h.order = retired++;
        finished.push_back(std::move(h));
      } else {
        h.r.tokens.push_back(c.token);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (t + 1 == max_len) {
      for (auto& h : live) {
        h.order = retired++;
        finished.push_back(std::move(h));
      }
      live.clear();
      break;
    }
    if (static_cast<int>(finished.size()) >= k && !live.empty()) {
      std::sort(finished.begin(), finished.end(), by_score);
      double best_live = -std::numeric_limits<double>::infinity();
      for (const auto& h : live) best_live = std::max(best_live, h.r.total_log_prob);
      if (finished[static_cast<std::size_t>(k - 1)].r.total_log_prob >= best_live) break;
    }
  }
  std::sort(finished.begin(), finished.end(), by_score);
  BeamSet out;
  out.k = k;
  for (std::size_t i = 0; i < finished.size() && static_cast<int>(i) < k; ++i) out.results.push_back(std::move(finished[i].r));
  return out;
}

// Multinomial sampling from softmax(log_probs / temperature); a temperature
// at or below 1e-6 falls back to greedy choice.
template <typename StepFn, typename Rng>
DecodeResult sample_search(StepFn&& step, int end_id, int max_len, double temperature, Rng& rng) {
  if (max_len < 1) throw std::invalid_argument("sample_search: max_len must be >= 1");
  if (temperature <= 1e-6) return greedy_search(step, end_id, max_len);
  DecodeResult out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < max_len; ++t) {
    const LogProbs lp = step(std::span<const int>(out.tokens));
    Eigen::VectorXd w = lp / temperature;
    w = (w.array() - w.maxCoeff()).exp();
    const double u = unit(rng) * w.sum();
    double acc = 0.0;
    int pick = static_cast<int>(lp.size()) - 1;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      acc += w(i);
      if (u < acc) {
        pick = static_cast<int>(i);
        break;
      }
    }
    out.log_probs.push_back(lp(pick));
    out.total_log_prob += lp(pick);
    if (pick == end_id) {
      out.ended = true;
      break;
    }
    out.tokens.push_back(pick);
  }
  return out;
}

}  // namespace sceneqa
