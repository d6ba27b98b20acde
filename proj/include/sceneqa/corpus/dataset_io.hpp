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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sceneqa/corpus/tokenize.hpp"
#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

// Dataset files are JSON arrays of ScanQA-style records:
//   {scene_id, question_id, question, answers: [str], object_ids: [int],
//    object_names: [str]}
// plus an optional "object_boxes": [[cx, cy, cz, ex, ey, ez], ...] aligned
// with object_ids, which supplies ground-truth boxes for localization.

inline QASample parse_record(const nlohmann::json& rec, std::size_t index) {
  try {
    QASample s;
    s.scene_id = rec.at("scene_id").get<std::string>();
    s.question_id = rec.at("question_id").get<std::string>();
    s.question = tokenize(rec.at("question").get<std::string>());
    if (s.question.empty()) throw ParseError("empty question");
    if (rec.contains("answers")) {
      for (const auto& a : rec.at("answers")) {
        TokenList toks = tokenize(a.get<std::string>());
        if (toks.empty()) throw ParseError("empty answer");
        s.answers.push_back(std::move(toks));
      }
    }
    if (rec.contains("object_ids")) s.target_object_ids = rec.at("object_ids").get<std::vector<int>>();
    if (rec.contains("object_names")) s.object_names = rec.at("object_names").get<std::vector<std::string>>();
    if (rec.contains("object_boxes")) {
      for (const auto& b : rec.at("object_boxes")) {
        const auto v = b.get<std::vector<double>>();
        if (v.size() != 6) throw ParseError("object box needs 6 values");
        s.gt_boxes.push_back(Box3::from_array(std::span<const double, 6>(v.data(), 6)));
      }
      if (s.gt_boxes.size() != s.target_object_ids.size()) {
        throw ParseError("object_boxes and object_ids differ in length");
      }
    }
    return s;
  } catch (const std::exception& e) {
    throw ParseError("dataset record " + std::to_string(index) + ": " + e.what());
  }
}

inline nlohmann::json to_record(const QASample& s) {
  nlohmann::json answers = nlohmann::json::array();
  for (const auto& a : s.answers) answers.push_back(join(a));
  nlohmann::json rec{{"scene_id", s.scene_id},
                     {"question_id", s.question_id},
                     {"question", join(s.question)},
                     {"answers", answers},
                     {"object_ids", s.target_object_ids},
                     {"object_names", s.object_names}};
  if (!s.gt_boxes.empty()) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : s.gt_boxes) boxes.push_back(b.to_array());
    rec["object_boxes"] = boxes;
  }
  return rec;
}

// Splits a multi-answer sample into one sample per answer. Question ids gain
// a _<k> suffix when more than one answer exists.
inline std::vector<QASample> expand_answers(const QASample& s) {
  if (s.answers.size() <= 1) return {s};
  std::vector<QASample> out;
  for (std::size_t k = 0; k < s.answers.size(); ++k) {
    QASample e = s;
    e.question_id = s.question_id + "_" + std::to_string(k);
    e.answers = {s.answers[k]};
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<QASample> parse_dataset(const nlohmann::json& root, Split split) {
  if (!root.is_array()) throw ParseError("dataset root must be a JSON array");
  std::vector<QASample> out;
  for (std::size_t i = 0; i < root.size(); ++i) {
    QASample s = parse_record(root[i], i);
    if (split != Split::kTest && s.answers.empty()) {
      throw ParseError("dataset record " + std::to_string(i) + ": no answers");
    }
    if (split == Split::kTrain) {
      for (auto& e : expand_answers(s)) out.push_back(std::move(e));
    } else {
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::vector<QASample> load_dataset(const std::string& path, Split split) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset file: " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset file " + path + ": " + e.what());
  }
  return parse_dataset(root, split);
}

inline void write_dataset(const std::string& path, const std::vector<QASample>& samples) {
  nlohmann::json root = nlohmann::json::array();
  for (const auto& s : samples) root.push_back(to_record(s));
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write dataset file: " + path);
  out << root.dump(1) << '\n';
}

}  // namespace sceneqa
