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
#include <optional>
#include <vector>

#include "sceneqa/decode/decode.hpp"
#include "sceneqa/metrics/cider.hpp"
#include "sceneqa/model/qa_model.hpp"
#include "sceneqa/train/data.hpp"

namespace sceneqa {

// Rewards of one sample. The question-reconstruction terms are present only
// when the frozen question generator is in use.
struct RewardBundle {
  double r_vqa_g = 0.0;
  double r_vqa_b = 0.0;
  std::optional<double> r_vqg_g;
  std::optional<double> r_vqg_b;
  double advantage = 0.0;
};

inline double advantage_of(double r_vqa_g, double r_vqa_b, std::optional<double> r_vqg_g,
                           std::optional<double> r_vqg_b) {
  double a = r_vqa_g - r_vqa_b;
  if (r_vqg_g && r_vqg_b) a += *r_vqg_g - *r_vqg_b;
  return a;
}

// Document frequencies for reward computation, fixed for a whole run: over
// training answers for the answer reward and training questions for the
// question-reconstruction reward.
struct RewardStats {
  metrics::NGramStats answers;
  metrics::NGramStats questions;
};

inline RewardStats build_reward_stats(const std::vector<QASample>& train) {
  std::vector<std::vector<TokenList>> answers;
  std::vector<std::vector<TokenList>> questions;
  for (const auto& s : train) {
    answers.push_back(s.answers);
    questions.push_back({s.question});
  }
  return RewardStats{metrics::build_idf(answers), metrics::build_idf(questions)};
}

// Scores generated answers against a sample's references and, optionally,
// the question the frozen generator reconstructs from them. Generator
// outputs are memoized per answer since greedy and beam answers often agree.
template <typename T>
class RewardScorer {
 public:
  RewardScorer(const RewardStats& stats, const Vocabulary& vocab, const QAModel<T>* vqg, DecodeOptions opt = {})
      : stats_(stats), vocab_(vocab), vqg_(vqg), opt_(opt) {}

  bool uses_vqg() const { return vqg_ != nullptr; }

  double answer_reward(const std::vector<int>& answer, const Example& ex) const {
    if (answer.empty()) return 0.0;
    return metrics::cider_value(vocab_.decode(answer), ex.references, stats_.answers);
  }

  double question_reward(const std::vector<int>& answer, const Example& ex) {
    if (answer.empty() || vqg_ == nullptr) return 0.0;
    if (memo_example_ != &ex) {
      memo_.clear();
      memo_example_ = &ex;
    }
    if (auto it = memo_.find(answer); it != memo_.end()) return it->second;
    const std::vector<int> question = regenerate_question(answer, ex);
    const double r = question.empty() ? 0.0
                                      : metrics::cider_value(vocab_.decode(question), {ex.sample->question},
                                                             stats_.questions);
    memo_.emplace(answer, r);
    return r;
  }

  std::vector<int> regenerate_question(const std::vector<int>& answer, const Example& ex) const {
    ad::NoGradGuard no_grad;
    const EncodedScene<T> enc = vqg_->encode(make_proposal_input<T>(*ex.proposals), answer);
    const EncodedScene<T> memory = vqg_->decoder_memory(enc, vqg_->localize(enc));
    return greedy_decode(*vqg_, memory, vqg_->config().max_output_len(), opt_).tokens;
  }

  // Gradient-bearing sequence `g` against the mean over `baselines`.
  RewardBundle score(const std::vector<int>& g, const std::vector<std::vector<int>>& baselines, const Example& ex) {
    RewardBundle b;
    b.r_vqa_g = answer_reward(g, ex);
    for (const auto& s : baselines) b.r_vqa_b += answer_reward(s, ex);
    b.r_vqa_b /= static_cast<double>(baselines.size());
    if (uses_vqg()) {
      b.r_vqg_g = question_reward(g, ex);
      double sum = 0.0;
      for (const auto& s : baselines) sum += question_reward(s, ex);
      b.r_vqg_b = sum / static_cast<double>(baselines.size());
    }
    b.advantage = advantage_of(b.r_vqa_g, b.r_vqa_b, b.r_vqg_g, b.r_vqg_b);
    return b;
  }

 private:
  const RewardStats& stats_;
  const Vocabulary& vocab_;
  const QAModel<T>* vqg_;
  DecodeOptions opt_;
  const Example* memo_example_ = nullptr;
  std::map<std::vector<int>, double> memo_;
};

}  // namespace sceneqa
