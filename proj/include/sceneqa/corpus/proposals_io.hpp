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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

// Per-scene proposal file, little-endian:
//   char[4] "G3DP" | u32 version | u32 P | f32 aabb[6] (min xyz, max xyz)
//   f32 features[P*32] | f32 centers[P*3] (raw scene units)
//   f32 boxes[P*6] | i32 class_ids[P]
inline constexpr std::array<char, 4> kProposalMagic{'G', '3', 'D', 'P'};
inline constexpr std::uint32_t kProposalVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("proposal file truncated");
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> serialize_proposals(const ProposalSet& set) {
  set.validate();
  detail::ByteWriter w;
  w.raw(kProposalMagic.data(), 4);
  w.u32(kProposalVersion);
  w.u32(static_cast<std::uint32_t>(set.size()));
  const Eigen::Vector3d lo = set.bounds.min();
  const Eigen::Vector3d hi = set.bounds.max();
  for (int i = 0; i < 3; ++i) w.f32(static_cast<float>(lo(i)));
  for (int i = 0; i < 3; ++i) w.f32(static_cast<float>(hi(i)));
  for (Eigen::Index i = 0; i < set.features.size(); ++i) w.f32(set.features.data()[i]);
  for (int p = 0; p < set.size(); ++p) {
    for (int d = 0; d < 3; ++d) {
      const double ext = hi(d) - lo(d);
      w.f32(static_cast<float>(lo(d) + static_cast<double>(set.centers(p, d)) * ext));
    }
  }
  for (Eigen::Index i = 0; i < set.boxes.size(); ++i) w.f32(set.boxes.data()[i]);
  for (int c : set.class_ids) w.i32(c);
  return w.bytes();
}

inline ProposalSet deserialize_proposals(std::vector<char> bytes, const std::string& scene_id) {
  detail::ByteReader r(std::move(bytes));
  std::array<char, 4> magic{};
  r.raw(magic.data(), 4);
  if (magic != kProposalMagic) throw FormatError("proposal file for '" + scene_id + "': bad magic");
  const std::uint32_t version = r.u32();
  if (version != kProposalVersion) {
    throw FormatError("proposal file for '" + scene_id + "': unsupported version " + std::to_string(version));
  }
  const std::uint32_t p = r.u32();
  const std::size_t expected = (6 + static_cast<std::size_t>(p) * (kFeatureDim + 3 + 6 + 1)) * 4;
  if (p == 0 || r.remaining() != expected) {
    throw FormatError("proposal file for '" + scene_id + "': header declares P=" + std::to_string(p) +
                      " but payload holds " + std::to_string(r.remaining()) + " bytes (expected " +
                      std::to_string(expected) + ")");
  }
  ProposalSet set;
  set.scene_id = scene_id;
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  for (int i = 0; i < 3; ++i) lo(i) = r.f32();
  for (int i = 0; i < 3; ++i) hi(i) = r.f32();
  set.bounds = Box3::from_min_max(lo, hi);
  const auto n = static_cast<Eigen::Index>(p);
  set.features.resize(n, kFeatureDim);
  for (Eigen::Index i = 0; i < set.features.size(); ++i) set.features.data()[i] = r.f32();
  set.centers.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      const double raw = r.f32();
      const double ext = hi(d) - lo(d);
      double c = ext > 0.0 ? (raw - lo(d)) / ext : 0.5;
      // float rounding at the faces
      if (c < 0.0 && c > -1e-5) c = 0.0;
      if (c > 1.0 && c < 1.0 + 1e-5) c = 1.0;
      set.centers(i, d) = static_cast<float>(c);
    }
  }
  set.boxes.resize(n, 6);
  for (Eigen::Index i = 0; i < set.boxes.size(); ++i) set.boxes.data()[i] = r.f32();
  set.class_ids.resize(p);
  for (auto& c : set.class_ids) c = r.i32();
  set.validate();
  return set;
}

inline std::string proposal_path(const std::string& dir, const std::string& scene_id) {
  return (std::filesystem::path(dir) / (scene_id + ".bin")).string();
}

inline void write_proposals(const std::string& dir, const ProposalSet& set) {
  std::filesystem::create_directories(dir);
  const auto bytes = serialize_proposals(set);
  const std::string path = proposal_path(dir, set.scene_id);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write proposal file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ProposalSet load_proposals(const std::string& dir, const std::string& scene_id) {
  const std::string path = proposal_path(dir, scene_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open proposal file: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_proposals(std::move(bytes), scene_id);
}

}  // namespace sceneqa
