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

#include "sceneqa/decode/decode.hpp"
#include "sceneqa/metrics/corpus.hpp"
#include "sceneqa/model/qa_model.hpp"
#include "sceneqa/train/data.hpp"

namespace sceneqa {

inline constexpr double kAccIouThreshold = 0.5;

// Eval-mode, gradient-free pass over one example: greedy output and the
// predicted target proposal.
struct Inference {
  DecodeResult greedy;
  int target_index = 0;
};

template <typename T>
EncodedScene<T> encode_example(const QAModel<T>& model, const Example& ex, std::span<const int> text,
                               const ForwardContext& ctx = {}) {
  return model.encode(make_proposal_input<T>(*ex.proposals), text, ctx);
}

template <typename T>
Inference infer(const QAModel<T>& model, const Example& ex, DecodeOptions opt = {}) {
  ad::NoGradGuard no_grad;
  const Task task = model.config().task;
  const EncodedScene<T> enc = encode_example(model, ex, ex.input(task));
  const LocalizationOutput<T> loc = model.localize(enc);
  const EncodedScene<T> memory = model.decoder_memory(enc, loc);
  Inference out;
  out.greedy = greedy_decode(model, memory, model.config().max_output_len(), opt);
  out.target_index = loc.target_index;
  return out;
}

struct EvalResult {
  metrics::Report scores;
  double acc_at_05 = 0.0;       // over samples with ground-truth boxes
  double token_accuracy = 0.0;  // teacher-forced, eval mode
  std::size_t count = 0;
  metrics::Predictions predictions;
  std::map<std::string, int> predicted_targets;
};

inline double score_of(const EvalResult& r, metrics::Metric m) { return r.scores.at(m).value; }

// Greedy-decodes every example. References are the sample's answers for the
// answering model and its question for the question generator.
template <typename T>
EvalResult evaluate(const QAModel<T>& model, const std::vector<Example>& examples, const Vocabulary& vocab,
                    DecodeOptions opt = {}) {
  ad::NoGradGuard no_grad;
  const Task task = model.config().task;
  EvalResult out;
  metrics::GoldReferences gold;
  int hits = 0;
  int localized = 0;
  int correct_tokens = 0;
  int total_tokens = 0;
  for (const auto& ex : examples) {
    const std::string& id = ex.sample->question_id;
    const EncodedScene<T> enc = encode_example(model, ex, ex.input(task));
    const LocalizationOutput<T> loc = model.localize(enc);
    const EncodedScene<T> memory = model.decoder_memory(enc, loc);
    const DecodeResult greedy = greedy_decode(model, memory, model.config().max_output_len(), opt);
    out.predictions[id] = vocab.decode(greedy.tokens);
    out.predicted_targets[id] = loc.target_index;
    gold[id] = task == Task::kVqa ? ex.references : std::vector<TokenList>{ex.sample->question};
    if (!ex.sample->gt_boxes.empty()) {
      ++localized;
      const Box3 predicted = ex.proposals->box(loc.target_index);
      for (const auto& g : ex.sample->gt_boxes) {
        if (iou(predicted, g) >= kAccIouThreshold) {
          ++hits;
          break;
        }
      }
    }
    const TeacherForcing tf = teacher_forcing(ex.output(task), model.config().max_output_len());
    const Tensor<T> logits = model.decode_logits(memory, tf.prefix);
    total_tokens += token_accuracy_counts(logits.value(), tf.targets, correct_tokens);
  }
  out.count = examples.size();
  out.scores = metrics::score_corpus(out.predictions, gold);
  out.acc_at_05 = localized ? static_cast<double>(hits) / localized : 0.0;
  out.token_accuracy = total_tokens ? static_cast<double>(correct_tokens) / total_tokens : 0.0;
  return out;
}

inline nlohmann::json to_json(const EvalResult& r) {
  return nlohmann::json{{"bleu1", score_of(r, metrics::Metric::kBleu1)},
                        {"bleu4", score_of(r, metrics::Metric::kBleu4)},
                        {"rouge_l", score_of(r, metrics::Metric::kRougeL)},
                        {"cider", score_of(r, metrics::Metric::kCider)},
                        {"acc_at_0.5", r.acc_at_05},
                        {"token_accuracy", r.token_accuracy},
                        {"count", r.count}};
}

}  // namespace sceneqa
