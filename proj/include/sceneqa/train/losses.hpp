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

#include <span>
#include <stdexcept>
#include <vector>

#include "sceneqa/core/autograd.hpp"
#include "sceneqa/corpus/types.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/geometry/box.hpp"

namespace sceneqa {

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LocalizationMode { kCrossEntropy, kBinary };

// Teacher-forced cross-entropy: sum over positions of -log softmax(logits)[target],
// skipping <pad> targets. Returns a 1x1 tensor for one sequence.
template <typename T>
Tensor<T> xe_loss(const Tensor<T>& logits, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) {
    throw AlignmentError("xe_loss: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(logits.rows()) + " logit rows");
  }
  std::vector<int> kept(targets.begin(), targets.end());
  for (int& t : kept) {
    if (t == kPadId) t = -1;
  }
  return ad::scale(ad::sum_log_softmax_at(logits, kept), T(-1));
}

// Teacher forcing pair for a target sequence: decoder input [<start>, y...]
// and next-token targets [y..., <end>]. Sequences that do not fit in max_len
// positions are cut and lose their <end> target.
struct TeacherForcing {
  std::vector<int> prefix;
  std::vector<int> targets;
};

inline TeacherForcing teacher_forcing(std::span<const int> sequence, int max_len) {
  TeacherForcing tf;
  const auto n = static_cast<std::size_t>(max_len);
  tf.prefix.push_back(kStartId);
  if (sequence.size() < n) {
    tf.prefix.insert(tf.prefix.end(), sequence.begin(), sequence.end());
    tf.targets.assign(sequence.begin(), sequence.end());
    tf.targets.push_back(kEndId);
  } else {
    tf.prefix.insert(tf.prefix.end(), sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(n - 1));
    tf.targets.assign(sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return tf;
}

// Counts argmax hits (lowest index on ties) over non-pad targets; returns the
// number of positions counted.
template <typename T>
int token_accuracy_counts(const Matrix<T>& logits, std::span<const int> targets, int& correct) {
  int total = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] == kPadId) continue;
    ++total;
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(static_cast<Eigen::Index>(r), c) > logits(static_cast<Eigen::Index>(r), best)) best = c;
    }
    if (best == targets[r]) ++correct;
  }
  return total;
}

// Supervision derived from box overlap between proposals and ground truth.
struct LocalizationTarget {
  int label = 0;               // proposal with the highest IoU against any GT box
  std::vector<double> best_iou;  // per proposal, max IoU over GT boxes
  bool fallback = false;       // every IoU was zero; label is index 0
};

inline LocalizationTarget localization_target(std::span<const Box3> proposals, std::span<const Box3> gt_boxes) {
  if (gt_boxes.empty()) throw std::invalid_argument("localization_target: no ground-truth boxes");
  LocalizationTarget t;
  t.best_iou.assign(proposals.size(), 0.0);
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    for (const auto& g : gt_boxes) t.best_iou[p] = std::max(t.best_iou[p], iou(proposals[p], g));
  }
  for (std::size_t p = 1; p < proposals.size(); ++p) {
    if (t.best_iou[p] > t.best_iou[static_cast<std::size_t>(t.label)]) t.label = static_cast<int>(p);
  }
  t.fallback = t.best_iou.empty() || t.best_iou[static_cast<std::size_t>(t.label)] <= 0.0;
  return t;
}

inline constexpr double kMultiObjectIou = 0.25;

// confidence: P x 1 scores. CE: softmax cross-entropy against the best-IoU
// proposal. BCE: mean binary cross-entropy against "IoU >= 0.25" labels.
template <typename T>
Tensor<T> localization_loss(const Tensor<T>& confidence, const LocalizationTarget& target, LocalizationMode mode) {
  if (static_cast<std::size_t>(confidence.rows()) != target.best_iou.size() || confidence.cols() != 1) {
    throw AlignmentError("localization_loss: confidence must be P x 1 matching the proposals");
  }
  if (mode == LocalizationMode::kCrossEntropy) {
    const int label = target.label;
    return ad::scale(ad::sum_log_softmax_at(ad::transpose(confidence), std::span<const int>(&label, 1)), T(-1));
  }
  Matrix<T> labels(confidence.rows(), 1);
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    labels(i, 0) = target.best_iou[static_cast<std::size_t>(i)] >= kMultiObjectIou ? T(1) : T(0);
  }
  return ad::bce_with_logits_mean(confidence, labels);
}

}  // namespace sceneqa
