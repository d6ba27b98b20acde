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
#include "sceneqa/corpus/types.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/model/config.hpp"
#include "sceneqa/train/losses.hpp"

namespace sceneqa {

// Everything a training run reads: samples, their scenes' proposals and the
// shared vocabulary.
struct TrainingData {
  Vocabulary vocab;
  std::vector<QASample> train;
  std::vector<QASample> val;
  std::map<std::string, ProposalSet> proposals;

  const ProposalSet& scene(const std::string& scene_id) const {
    auto it = proposals.find(scene_id);
    if (it == proposals.end()) throw LoadError("no proposals loaded for scene '" + scene_id + "'");
    return it->second;
  }
};

// A sample resolved against the vocabulary and its proposals.
struct Example {
  const QASample* sample = nullptr;
  const ProposalSet* proposals = nullptr;
  std::vector<int> question;
  std::vector<int> answer;  // first reference answer
  std::vector<TokenList> references;
  LocalizationTarget localization;

  // Encoder text and decoder target for the given direction.
  const std::vector<int>& input(Task task) const { return task == Task::kVqa ? question : answer; }
  const std::vector<int>& output(Task task) const { return task == Task::kVqa ? answer : question; }
};

inline Example make_example(const QASample& s, const TrainingData& data) {
  Example e;
  e.sample = &s;
  e.proposals = &data.scene(s.scene_id);
  e.question = data.vocab.encode(s.question);
  if (!s.answers.empty()) e.answer = data.vocab.encode(s.answers.front());
  e.references = s.answers;
  if (!s.gt_boxes.empty()) {
    std::vector<Box3> boxes;
    for (int i = 0; i < e.proposals->size(); ++i) boxes.push_back(e.proposals->box(i));
    e.localization = localization_target(boxes, s.gt_boxes);
  }
  return e;
}

inline std::vector<Example> make_examples(const std::vector<QASample>& samples, const TrainingData& data) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(make_example(s, data));
  return out;
}

}  // namespace sceneqa
