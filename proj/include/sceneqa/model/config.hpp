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

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

#include "sceneqa/core/errors.hpp"
#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

// Which text goes into the encoder: the question (answering) or the answer
// (question generation, same architecture with swapped text roles).
enum class Task { kVqa, kVqg };

inline const char* to_string(Task t) { return t == Task::kVqa ? "vqa" : "vqg"; }
inline Task parse_task(const std::string& s) {
  if (s == "vqa") return Task::kVqa;
  if (s == "vqg") return Task::kVqg;
  throw ConfigError("unknown task '" + s + "' (expected vqa or vqg)");
}

struct ModelConfig {
  int d_model = 300;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 6;
  int ffn_dim = 1200;
  double dropout = 0.1;
  int max_answer_len = 20;
  int max_question_len = 40;
  int p_max = 128;
  int vocab_size = 0;
  int feature_dim = kFeatureDim;
  int loc_hidden = 128;
  bool multi_object_bce = false;
  bool use_localization = true;
  bool target_embeddings = false;
  Task task = Task::kVqa;

  // Longest encoder text input and longest decoder prefix for this task.
  int max_input_len() const { return task == Task::kVqa ? max_question_len : max_answer_len; }
  int max_output_len() const { return task == Task::kVqa ? max_answer_len : max_question_len; }

  void validate() const {
    if (d_model < 4) throw ConfigError("model: d_model must be >= 4");
    if (heads < 1 || d_model % heads != 0) throw ConfigError("model: heads must divide d_model");
    if (encoder_layers < 1 || decoder_layers < 1) throw ConfigError("model: need at least one layer each");
    if (ffn_dim < 1 || loc_hidden < 1) throw ConfigError("model: ffn_dim and loc_hidden must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model: dropout must be in [0,1)");
    if (vocab_size < 4) throw ConfigError("model: vocab_size must include the 4 special tokens");
    if (max_answer_len < 1 || max_question_len < 1 || p_max < 1) throw ConfigError("model: lengths must be positive");
    if (feature_dim < 1) throw ConfigError("model: feature_dim must be positive");
  }

  bool operator==(const ModelConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_model", c.d_model},
                     {"encoder_layers", c.encoder_layers},
                     {"decoder_layers", c.decoder_layers},
                     {"heads", c.heads},
                     {"ffn_dim", c.ffn_dim},
                     {"dropout", c.dropout},
                     {"max_answer_len", c.max_answer_len},
                     {"max_question_len", c.max_question_len},
                     {"p_max", c.p_max},
                     {"vocab_size", c.vocab_size},
                     {"feature_dim", c.feature_dim},
                     {"loc_hidden", c.loc_hidden},
                     {"multi_object_bce", c.multi_object_bce},
                     {"use_localization", c.use_localization},
                     {"target_embeddings", c.target_embeddings},
                     {"task", to_string(c.task)}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("d_model").get_to(c.d_model);
  j.at("encoder_layers").get_to(c.encoder_layers);
  j.at("decoder_layers").get_to(c.decoder_layers);
  j.at("heads").get_to(c.heads);
  j.at("ffn_dim").get_to(c.ffn_dim);
  j.at("dropout").get_to(c.dropout);
  j.at("max_answer_len").get_to(c.max_answer_len);
  j.at("max_question_len").get_to(c.max_question_len);
  j.at("p_max").get_to(c.p_max);
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("feature_dim").get_to(c.feature_dim);
  j.at("loc_hidden").get_to(c.loc_hidden);
  j.at("multi_object_bce").get_to(c.multi_object_bce);
  j.at("use_localization").get_to(c.use_localization);
  j.at("target_embeddings").get_to(c.target_embeddings);
  c.task = parse_task(j.at("task").get<std::string>());
}

// Number of scalar parameters of a model built from `c`:
//   projection       F*d + d
//   word embeddings  V*d
//   encoder layer    4(d^2 + d) + 2(d*f) + f + d + 4d
//   decoder layer    8(d^2 + d) + 2(d*f) + f + d + 6d
//   output head      d*V + V
//   localization     d*H + H + H + 1
//   target embeds    2d
inline std::size_t parameter_count(const ModelConfig& c) {
  const std::size_t d = static_cast<std::size_t>(c.d_model);
  const std::size_t f = static_cast<std::size_t>(c.ffn_dim);
  const std::size_t v = static_cast<std::size_t>(c.vocab_size);
  const std::size_t feat = static_cast<std::size_t>(c.feature_dim);
  const std::size_t h = static_cast<std::size_t>(c.loc_hidden);
  const std::size_t ffn = 2 * d * f + f + d;
  const std::size_t enc = 4 * (d * d + d) + ffn + 4 * d;
  const std::size_t dec = 8 * (d * d + d) + ffn + 6 * d;
  return feat * d + d + v * d + static_cast<std::size_t>(c.encoder_layers) * enc +
         static_cast<std::size_t>(c.decoder_layers) * dec + d * v + v + d * h + 2 * h + 1 + 2 * d;
}

}  // namespace sceneqa
