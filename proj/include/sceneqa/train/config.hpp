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

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "sceneqa/core/errors.hpp"
#include "sceneqa/model/config.hpp"

namespace sceneqa {

enum class Stage { kXe, kScst };

inline const char* to_string(Stage s) { return s == Stage::kXe ? "xe" : "scst"; }
inline Stage parse_stage(const std::string& s) {
  if (s == "xe") return Stage::kXe;
  if (s == "scst") return Stage::kScst;
  throw ConfigError("unknown stage '" + s + "' (expected xe or scst)");
}

inline constexpr double kXeLearningRate = 8e-5;
inline constexpr double kScstLearningRate = 2e-5;

struct TrainConfig {
  Stage stage = Stage::kXe;
  Task task = Task::kVqa;
  double lr = 0.0;  // 0 picks the stage default
  int batch_size = 64;
  int beam_k = 3;
  bool vqg_reward = true;
  bool multi_object_bce = false;
  bool use_localization = true;
  bool scst_switched = false;
  bool augment = true;  // replace one question word with <unk> per example
  long max_iterations = 1000;
  long val_every = 500;
  long log_every = 1;
  std::uint64_t seed = 1;
  double grad_clip = 5.0;      // global norm; <= 0 disables
  double temperature = 1.0;    // sampling temperature for the switched variant
  bool suppress_unk = false;

  double effective_lr() const {
    if (lr > 0.0) return lr;
    return stage == Stage::kXe ? kXeLearningRate : kScstLearningRate;
  }

  void validate() const {
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (beam_k < 1) throw ConfigError("train: beam_k must be >= 1");
    if (max_iterations < 0) throw ConfigError("train: max_iterations must be >= 0");
    if (val_every < 0 || log_every < 0) throw ConfigError("train: val_every and log_every must be >= 0");
    if (lr < 0.0) throw ConfigError("train: lr must be >= 0");
    if (temperature < 0.0) throw ConfigError("train: temperature must be >= 0");
    if (task == Task::kVqg && stage == Stage::kScst) throw ConfigError("train: the question generator trains with xe only");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"stage", to_string(c.stage)},
                     {"task", to_string(c.task)},
                     {"lr", c.effective_lr()},
                     {"batch_size", c.batch_size},
                     {"beam_k", c.beam_k},
                     {"vqg_reward", c.vqg_reward},
                     {"multi_object_bce", c.multi_object_bce},
                     {"use_localization", c.use_localization},
                     {"scst_switched", c.scst_switched},
                     {"augment", c.augment},
                     {"max_iterations", c.max_iterations},
                     {"val_every", c.val_every},
                     {"log_every", c.log_every},
                     {"seed", c.seed},
                     {"grad_clip", c.grad_clip},
                     {"temperature", c.temperature},
                     {"suppress_unk", c.suppress_unk}};
}

}  // namespace sceneqa
