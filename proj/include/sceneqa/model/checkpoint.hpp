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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sceneqa/corpus/proposals_io.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/model/qa_model.hpp"

namespace sceneqa {

// Checkpoint container, little-endian:
//   char[4] "G3DC" | u32 version | u32 header_bytes | JSON header
//   f32 tensor data in header order (row-major)
// The header holds the model config, the vocabulary (and its hash), tensor
// names/shapes and a free-form "extra" object.
inline constexpr std::array<char, 4> kCheckpointMagic{'G', '3', 'D', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  std::vector<std::pair<std::string, Matrix<float>>> tensors;
  nlohmann::json extra = nlohmann::json::object();
};

template <typename T>
Checkpoint make_checkpoint(const QAModel<T>& model, const Vocabulary& vocab, nlohmann::json extra = nlohmann::json::object()) {
  Checkpoint ck;
  ck.config = model.config();
  ck.vocab = vocab;
  ck.extra = std::move(extra);
  for (const auto& [name, t] : model.parameters().items()) ck.tensors.emplace_back(name, t.value().template cast<float>());
  return ck;
}

inline std::vector<char> serialize_checkpoint(const Checkpoint& ck) {
  nlohmann::json header;
  header["config"] = ck.config;
  header["vocab"] = ck.vocab.tokens();
  header["vocab_hash"] = ck.vocab.hash();
  header["extra"] = ck.extra;
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& [name, m] : ck.tensors) shapes.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  header["tensors"] = shapes;
  const std::string text = header.dump();
  detail::ByteWriter w;
  w.raw(kCheckpointMagic.data(), 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text.data(), text.size());
  for (const auto& [name, m] : ck.tensors) {
    for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(m.data()[i]);
  }
  return w.bytes();
}

inline Checkpoint deserialize_checkpoint(std::vector<char> bytes) {
  try {
    detail::ByteReader r(std::move(bytes));
    std::array<char, 4> magic{};
    r.raw(magic.data(), 4);
    if (magic != kCheckpointMagic) throw CheckpointError("not a checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    std::string text(r.u32(), '\0');
    r.raw(text.data(), text.size());
    const nlohmann::json header = nlohmann::json::parse(text);
    Checkpoint ck;
    ck.config = header.at("config").get<ModelConfig>();
    ck.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
    if (ck.vocab.hash() != header.at("vocab_hash").get<std::uint64_t>()) {
      throw CheckpointError("checkpoint vocabulary does not match its stored hash");
    }
    ck.extra = header.value("extra", nlohmann::json::object());
    for (const auto& t : header.at("tensors")) {
      Matrix<float> m(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32();
      ck.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
    if (r.remaining() != 0) throw CheckpointError("trailing bytes after tensor data");
    return ck;
  } catch (const FormatError& e) {
    throw CheckpointError(std::string("checkpoint truncated: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  } catch (const ParseError& e) {
    throw CheckpointError(std::string("checkpoint vocabulary: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto bytes = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint: " + path);
  return deserialize_checkpoint(std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

// Copies checkpoint tensors into `model`. Refuses on any config or
// vocabulary mismatch.
template <typename T>
void restore(QAModel<T>& model, const Checkpoint& ck, const Vocabulary& vocab) {
  if (!(ck.config == model.config())) throw CheckpointError("checkpoint model config differs from the target model");
  if (ck.vocab.hash() != vocab.hash()) throw CheckpointError("checkpoint vocabulary hash differs from the dataset vocabulary");
  const auto& items = model.parameters().items();
  if (items.size() != ck.tensors.size()) throw CheckpointError("checkpoint tensor count differs from the model");
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [name, t] = items[i];
    const auto& [ck_name, m] = ck.tensors[i];
    if (name != ck_name || m.rows() != t.rows() || m.cols() != t.cols()) {
      throw CheckpointError("checkpoint tensor mismatch at " + ck_name);
    }
    t.mutable_value() = m.cast<T>();
  }
}

template <typename T>
QAModel<T> model_from_checkpoint(const Checkpoint& ck, const Vocabulary& vocab) {
  QAModel<T> model(ck.config, 0);
  restore(model, ck, vocab);
  return model;
}

}  // namespace sceneqa
