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

#include <string>
#include <vector>

#include "sceneqa/core/autograd.hpp"
#include "sceneqa/core/errors.hpp"
#include "sceneqa/geometry/box.hpp"

namespace sceneqa {

using TokenList = std::vector<std::string>;

enum class Split { kTrain, kVal, kTest };

inline constexpr int kFeatureDim = 32;

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "' (expected train, val or test)");
}

// Object proposals of one scene. Centers are normalized to [0,1]^3 against
// `bounds`; boxes stay in scene units (center xyz, extent xyz).
struct ProposalSet {
  std::string scene_id;
  Matrix<float> features;  // P x 32
  Matrix<float> centers;   // P x 3
  Matrix<float> boxes;     // P x 6
  std::vector<int> class_ids;
  Box3 bounds;

  int size() const { return static_cast<int>(features.rows()); }

  Box3 box(int i) const {
    return Box3{boxes.row(i).head<3>().cast<double>().transpose(),
                boxes.row(i).tail<3>().cast<double>().transpose()};
  }

  void validate() const {
    const auto p = features.rows();
    if (p < 1) throw FormatError("proposal set '" + scene_id + "' is empty");
    if (features.cols() != kFeatureDim || centers.rows() != p || centers.cols() != 3 ||
        boxes.rows() != p || boxes.cols() != 6 || static_cast<Eigen::Index>(class_ids.size()) != p) {
      throw FormatError("proposal set '" + scene_id + "' has inconsistent array shapes");
    }
    if ((centers.array() < 0.0f).any() || (centers.array() > 1.0f).any()) {
      throw FormatError("proposal set '" + scene_id + "' has centers outside [0,1]");
    }
    if ((boxes.rightCols<3>().array() <= 0.0f).any()) {
      throw FormatError("proposal set '" + scene_id + "' has non-positive box extents");
    }
  }
};

struct QASample {
  std::string scene_id;
  std::string question_id;
  TokenList question;
  std::vector<TokenList> answers;
  std::vector<int> target_object_ids;
  std::vector<Box3> gt_boxes;
  std::vector<std::string> object_names;
};

}  // namespace sceneqa
