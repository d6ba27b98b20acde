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

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <span>

namespace sceneqa {

// Axis-aligned 3D box stored as center and full extents.
struct Box3 {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extent = Eigen::Vector3d::Zero();

  Eigen::Vector3d min() const { return center - 0.5 * extent; }
  Eigen::Vector3d max() const { return center + 0.5 * extent; }
  double volume() const { return extent.x() * extent.y() * extent.z(); }

  static Box3 from_min_max(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    return Box3{0.5 * (lo + hi), hi - lo};
  }

  std::array<double, 6> to_array() const {
    return {center.x(), center.y(), center.z(), extent.x(), extent.y(), extent.z()};
  }
  static Box3 from_array(std::span<const double, 6> v) {
    return Box3{Eigen::Vector3d(v[0], v[1], v[2]), Eigen::Vector3d(v[3], v[4], v[5])};
  }
};

inline double intersection_volume(const Box3& a, const Box3& b) {
  const Eigen::Vector3d lo = a.min().cwiseMax(b.min());
  const Eigen::Vector3d hi = a.max().cwiseMin(b.max());
  const Eigen::Vector3d side = (hi - lo).cwiseMax(0.0);
  return side.x() * side.y() * side.z();
}

inline double iou(const Box3& a, const Box3& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Corner i has bit 0 -> x, bit 1 -> y, bit 2 -> z selecting max (1) or min (0).
inline std::array<Eigen::Vector3d, 8> to_corners(const Box3& box) {
  std::array<Eigen::Vector3d, 8> out;
  const Eigen::Vector3d lo = box.min();
  const Eigen::Vector3d hi = box.max();
  for (int i = 0; i < 8; ++i) {
    out[i] = Eigen::Vector3d((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                             (i & 4) ? hi.z() : lo.z());
  }
  return out;
}

inline Box3 from_corners(std::span<const Eigen::Vector3d> corners) {
  Eigen::Vector3d lo = corners.front();
  Eigen::Vector3d hi = corners.front();
  for (const auto& c : corners) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  return Box3::from_min_max(lo, hi);
}

}  // namespace sceneqa
