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

#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "sceneqa/core/autograd.hpp"
#include "sceneqa/decode/search.hpp"
#include "sceneqa/model/incremental.hpp"
#include "sceneqa/model/qa_model.hpp"

namespace sceneqa {

struct DecodeOptions {
  bool suppress_unk = false;
};

// Next-token log-probabilities from the model decoder. Decoder states are
// cached per generated prefix, so extending a prefix by one token costs one
// incremental step. Not thread-safe; use one instance per thread.
template <typename T>
class ModelStep {
 public:
  ModelStep(const QAModel<T>& model, const EncodedScene<T>& memory, DecodeOptions opt = {})
      : decoder_(model, memory), opt_(opt) {}

  LogProbs operator()(std::span<const int> generated) {
    const std::vector<int> key(generated.begin(), generated.end());
    return entry(key).log_probs;
  }

 private:
  struct Entry {
    typename IncrementalDecoder<T>::State state;
    LogProbs log_probs;
  };

  const Entry& entry(const std::vector<int>& key) {
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Entry e;
    if (key.empty()) {
      e.state = decoder_.initial_state();
      e.log_probs = to_log_probs(decoder_.advance(e.state, kStartId));
    } else {
      const std::vector<int> parent(key.begin(), key.end() - 1);
      e.state = entry(parent).state;
      e.log_probs = to_log_probs(decoder_.advance(e.state, key.back()));
    }
    return cache_.emplace(key, std::move(e)).first->second;
  }

  LogProbs to_log_probs(const RowVector<T>& logits) const {
    Eigen::Matrix<double, 1, Eigen::Dynamic> row = logits.template cast<double>();
    if (opt_.suppress_unk) row(kUnkId) = -std::numeric_limits<double>::infinity();
    return ad::log_softmax_rows<double>(row).row(0).transpose();
  }

  IncrementalDecoder<T> decoder_;
  DecodeOptions opt_;
  std::map<std::vector<int>, Entry> cache_;
};

template <typename T>
DecodeResult greedy_decode(const QAModel<T>& model, const EncodedScene<T>& memory, int max_len,
                           DecodeOptions opt = {}) {
  return greedy_search(ModelStep<T>(model, memory, opt), kEndId, max_len);
}

template <typename T>
BeamSet beam_decode(const QAModel<T>& model, const EncodedScene<T>& memory, int k, int max_len,
                    DecodeOptions opt = {}) {
  if (k < 1 || k > model.config().vocab_size) throw std::invalid_argument("beam_decode: need 1 <= k <= vocab_size");
  return beam_search(ModelStep<T>(model, memory, opt), kEndId, k, max_len);
}

template <typename T, typename Rng>
DecodeResult sample_decode(const QAModel<T>& model, const EncodedScene<T>& memory, int max_len, double temperature,
                           Rng& rng, DecodeOptions opt = {}) {
  return sample_search(ModelStep<T>(model, memory, opt), kEndId, max_len, temperature, rng);
}

}  // namespace sceneqa
