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

namespace sceneqa::metrics {

enum class Metric { kBleu1, kBleu4, kRougeL, kCider };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kBleu1: return "BLEU-1";
    case Metric::kBleu4: return "BLEU-4";
    case Metric::kRougeL: return "ROUGE-L";
    case Metric::kCider: return "CIDEr";
  }
  return "?";
}

struct Score {
  Metric metric = Metric::kCider;
  double value = 0.0;
};

}  // namespace sceneqa::metrics
