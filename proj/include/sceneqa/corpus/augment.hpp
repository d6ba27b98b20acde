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

#include <random>

#include "sceneqa/corpus/types.hpp"
#include "sceneqa/corpus/vocabulary.hpp"

namespace sceneqa {

inline TokenList augment_question_at(const TokenList& question, std::size_t index) {
  TokenList out = question;
  out.at(index) = kUnkToken;
  return out;
}

// Replaces one uniformly chosen token with <unk>.
template <typename Rng>
TokenList augment_question(const TokenList& question, Rng& rng) {
  if (question.empty()) throw ConfigError("augment_question: empty question");
  std::uniform_int_distribution<std::size_t> pick(0, question.size() - 1);
  return augment_question_at(question, pick(rng));
}

// Id-level variant used by the training loop.
template <typename Rng>
std::vector<int> augment_question_ids(std::vector<int> ids, Rng& rng) {
  if (ids.empty()) return ids;
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  ids[pick(rng)] = kUnkId;
  return ids;
}

}  // namespace sceneqa
