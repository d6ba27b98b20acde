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

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sceneqa/corpus/tokenize.hpp"
#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

// Desk-scale stand-in for ScanQA: rooms of axis-aligned boxes with a class
// and a color, plus templated questions whose answers follow from the scene.
//
// Proposal features (32 floats) are a fixed encoding of each object:
//   [0, 12)   one-hot class index
//   [12, 20)  one-hot color index
//   [20, 23)  box extents (scene units)
//   23        box volume
//   [24, 32)  zero
// kShort answers are ScanQA-like ("red", "3"); kSentence answers restate the
// question ("the chair is red") and keep the short forms as paraphrases.
enum class AnswerStyle { kShort, kSentence };

struct SyntheticConfig {
  int num_scenes = 8;
  int min_objects = 3;
  int max_objects = 6;
  int questions_per_scene = 4;
  std::vector<std::string> classes{"chair", "table", "sofa", "bed", "lamp", "desk", "cabinet", "door"};
  std::vector<std::string> colors{"red", "blue", "green", "white", "black", "brown"};
  bool paraphrases = false;  // add alternative phrasings of every answer
  AnswerStyle answer_style = AnswerStyle::kShort;
  double room_size = 6.0;
  double proposal_jitter = 0.03;  // relative noise on proposal boxes
  std::string scene_prefix = "scene";
};

inline constexpr int kMaxSyntheticClasses = 12;
inline constexpr int kMaxSyntheticColors = 8;

struct SceneObject {
  int id = 0;
  int class_index = 0;
  int color_index = 0;
  Box3 box;
};

struct SyntheticScene {
  std::string scene_id;
  std::vector<SceneObject> objects;
};

struct SyntheticDataset {
  std::vector<SyntheticScene> scenes;
  std::vector<ProposalSet> proposals;
  std::vector<QASample> samples;
};

inline Eigen::Vector3d synthetic_base_extent(int class_index) {
  static const Eigen::Vector3d kBase[] = {
      {0.5, 0.5, 0.9}, {1.2, 0.8, 0.75}, {2.0, 0.9, 0.8}, {2.0, 1.6, 0.6},
      {0.4, 0.4, 1.5}, {1.4, 0.7, 0.75}, {0.8, 0.5, 1.8}, {0.9, 0.1, 2.0},
  };
  return kBase[class_index % 8];
}

inline void encode_object_features(int class_index, int color_index, const Eigen::Vector3d& extent,
                                   Eigen::Ref<Eigen::Matrix<float, 1, kFeatureDim>> out) {
  out.setZero();
  out(class_index) = 1.0f;
  out(kMaxSyntheticClasses + color_index) = 1.0f;
  for (int d = 0; d < 3; ++d) out(20 + d) = static_cast<float>(extent(d));
  out(23) = static_cast<float>(extent.prod());
}

namespace detail {

inline std::string plural(const std::string& noun) { return noun + "s"; }

inline QASample make_qa(const SyntheticScene& scene, const SyntheticConfig& cfg, const std::string& question,
                        std::vector<std::string> answers, const std::vector<const SceneObject*>& targets) {
  QASample s;
  s.scene_id = scene.scene_id;
  s.question = tokenize(question);
  if (!cfg.paraphrases) answers.resize(1);
  for (const auto& a : answers) s.answers.push_back(tokenize(a));
  for (const auto* o : targets) {
    s.target_object_ids.push_back(o->id);
    s.gt_boxes.push_back(o->box);
    s.object_names.push_back(cfg.classes[static_cast<std::size_t>(o->class_index)]);
  }
  return s;
}

}  // namespace detail

// Every question the templates can ask about a scene, in a fixed order:
// color questions for classes present exactly once, count questions for every
// present class, then "next to" questions where the nearest neighbour of a
// unique object is unambiguous (second nearest at least 0.25 further away).
inline std::vector<QASample> scene_questions(const SyntheticScene& scene, const SyntheticConfig& cfg) {
  std::map<int, std::vector<const SceneObject*>> by_class;
  for (const auto& o : scene.objects) by_class[o.class_index].push_back(&o);
  std::vector<QASample> out;
  for (const auto& [cls, objs] : by_class) {
    if (objs.size() != 1) continue;
    const std::string& name = cfg.classes[static_cast<std::size_t>(cls)];
    const std::string& color = cfg.colors[static_cast<std::size_t>(objs[0]->color_index)];
    std::vector<std::string> answers{color, color + " color", "it is " + color};
    if (cfg.answer_style == AnswerStyle::kSentence) answers.insert(answers.begin(), "the " + name + " is " + color);
    out.push_back(detail::make_qa(scene, cfg, "what color is the " + name, answers, objs));
  }
  for (const auto& [cls, objs] : by_class) {
    const std::string& name = cfg.classes[static_cast<std::size_t>(cls)];
    const std::string n = std::to_string(objs.size());
    std::vector<std::string> answers =
        objs.size() == 1 ? std::vector<std::string>{n, "there is " + n, n + " " + name}
                         : std::vector<std::string>{n, "there are " + n, n + " " + detail::plural(name)};
    if (cfg.answer_style == AnswerStyle::kSentence) {
      answers.insert(answers.begin(), objs.size() == 1 ? "there is one " + name
                                                       : "there are " + n + " " + detail::plural(name));
    }    out.push_back(detail::make_qa(scene, cfg, "how many " + detail::plural(name) + " are there", answers, objs));
  }
  for (const auto& [cls, objs] : by_class) {
    if (objs.size() != 1 || scene.objects.size() < 2) continue;
    const SceneObject* ref = objs[0];
    const SceneObject* best = nullptr;
    double best_d = 1e300;
    double second_d = 1e300;
    for (const auto& o : scene.objects) {
      if (&o == ref) continue;
      const double d = (o.box.center - ref->box.center).head<2>().norm();
      if (d < best_d) {
        second_d = best_d;
        best_d = d;
        best = &o;
      } else if (d < second_d) {
        second_d = d;
      }
    }
    if (second_d - best_d < 0.25) continue;
    const std::string& name = cfg.classes[static_cast<std::size_t>(cls)];
    const std::string& other = cfg.classes[static_cast<std::size_t>(best->class_index)];
    const std::string& other_color = cfg.colors[static_cast<std::size_t>(best->color_index)];
    std::vector<std::string> answers{other, "the " + other, "a " + other_color + " " + other};
    if (cfg.answer_style == AnswerStyle::kSentence) answers.insert(answers.begin(), "the " + other + " is next to it");
    out.push_back(detail::make_qa(scene, cfg, "what is next to the " + name, answers, {best}));
  }
  return out;
}

// Proposals for a scene: one per object, box perturbed by the configured
// jitter, centers normalized to the AABB of all proposal boxes.
template <typename Rng>
ProposalSet scene_proposals(const SyntheticScene& scene, const SyntheticConfig& cfg, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto p = static_cast<Eigen::Index>(scene.objects.size());
  ProposalSet set;
  set.scene_id = scene.scene_id;
  set.features.resize(p, kFeatureDim);
  set.centers.resize(p, 3);
  set.boxes.resize(p, 6);
  std::vector<Box3> boxes;
  for (const auto& o : scene.objects) {
    Box3 b = o.box;
    for (int d = 0; d < 3; ++d) {
      b.center(d) += cfg.proposal_jitter * o.box.extent(d) * noise(rng);
      b.extent(d) = std::max(0.05 * o.box.extent(d), o.box.extent(d) * (1.0 + cfg.proposal_jitter * noise(rng)));
    }
    boxes.push_back(b);
  }
  Eigen::Vector3d lo = boxes.front().min();
  Eigen::Vector3d hi = boxes.front().max();
  for (const auto& b : boxes) {
    lo = lo.cwiseMin(b.min());
    hi = hi.cwiseMax(b.max());
  }
  set.bounds = Box3::from_min_max(lo, hi);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& o = scene.objects[static_cast<std::size_t>(i)];
    const Box3& b = boxes[static_cast<std::size_t>(i)];
    encode_object_features(o.class_index, o.color_index, b.extent, set.features.row(i));
    for (int d = 0; d < 3; ++d) {
      set.centers(i, d) = static_cast<float>((b.center(d) - lo(d)) / (hi(d) - lo(d)));
      set.boxes(i, d) = static_cast<float>(b.center(d));
      set.boxes(i, 3 + d) = static_cast<float>(b.extent(d));
    }
    set.class_ids.push_back(o.class_index);
  }
  return set;
}

inline void validate(const SyntheticConfig& cfg) {
  if (cfg.num_scenes < 1) throw ConfigError("synthetic config: num_scenes must be >= 1");
  if (cfg.min_objects < 1 || cfg.max_objects < 1) throw ConfigError("synthetic config: scenes need at least one object");
  if (cfg.min_objects > cfg.max_objects) throw ConfigError("synthetic config: min_objects > max_objects");
  if (cfg.classes.empty() || static_cast<int>(cfg.classes.size()) > kMaxSyntheticClasses) {
    throw ConfigError("synthetic config: need 1..12 classes");
  }
  if (cfg.colors.empty() || static_cast<int>(cfg.colors.size()) > kMaxSyntheticColors) {
    throw ConfigError("synthetic config: need 1..8 colors");
  }
  if (cfg.questions_per_scene < 1) throw ConfigError("synthetic config: questions_per_scene must be >= 1");
}

inline SyntheticDataset generate_synthetic_dataset(const SyntheticConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_objects(cfg.min_objects, cfg.max_objects);
  std::uniform_int_distribution<int> pick_class(0, static_cast<int>(cfg.classes.size()) - 1);
  std::uniform_int_distribution<int> pick_color(0, static_cast<int>(cfg.colors.size()) - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SyntheticDataset data;
  for (int s = 0; s < cfg.num_scenes; ++s) {
    SyntheticScene scene;
    char id[64];
    std::snprintf(id, sizeof(id), "%s%04d", cfg.scene_prefix.c_str(), s);
    scene.scene_id = id;
    const int n = n_objects(rng);
    for (int i = 0; i < n; ++i) {
      SceneObject o;
      o.id = i;
      o.class_index = pick_class(rng);
      o.color_index = pick_color(rng);
      Eigen::Vector3d ext = synthetic_base_extent(o.class_index) * (0.8 + 0.4 * unit(rng));
      Eigen::Vector3d c;
      for (int attempt = 0; attempt < 200; ++attempt) {
        c = Eigen::Vector3d(ext.x() / 2 + unit(rng) * (cfg.room_size - ext.x()),
                            ext.y() / 2 + unit(rng) * (cfg.room_size - ext.y()), ext.z() / 2);
        bool clear = true;
        for (const auto& other : scene.objects) {
          const Eigen::Vector2d gap = (c - other.box.center).head<2>().cwiseAbs() -
                                      0.5 * (ext + other.box.extent).head<2>();
          if (gap.x() < 0.2 && gap.y() < 0.2) {
            clear = false;
            break;
          }
        }
        if (clear) break;
      }
      o.box = Box3{c, ext};
      scene.objects.push_back(o);
    }
    data.proposals.push_back(scene_proposals(scene, cfg, rng));
    std::vector<QASample> qs = scene_questions(scene, cfg);
    std::shuffle(qs.begin(), qs.end(), rng);
    if (static_cast<int>(qs.size()) > cfg.questions_per_scene) qs.resize(static_cast<std::size_t>(cfg.questions_per_scene));
    for (std::size_t q = 0; q < qs.size(); ++q) {
      qs[q].question_id = scene.scene_id + "_q" + std::to_string(q);
      data.samples.push_back(std::move(qs[q]));
    }
    data.scenes.push_back(std::move(scene));
  }
  return data;
}

}  // namespace sceneqa
