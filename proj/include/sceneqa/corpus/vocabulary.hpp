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
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

inline constexpr int kPadId = 0;
inline constexpr int kStartId = 1;
inline constexpr int kEndId = 2;
inline constexpr int kUnkId = 3;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kStartToken = "<start>";
inline constexpr const char* kEndToken = "<end>";
inline constexpr const char* kUnkToken = "<unk>";

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Shared question/answer vocabulary. Ids 0..3 are <pad>, <start>, <end>, <unk>.
class Vocabulary {
 public:
  Vocabulary() : id_to_token_{kPadToken, kStartToken, kEndToken, kUnkToken} { reindex(); }

  explicit Vocabulary(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
    if (id_to_token_.size() < 4 || id_to_token_[0] != kPadToken || id_to_token_[1] != kStartToken ||
        id_to_token_[2] != kEndToken || id_to_token_[3] != kUnkToken) {
      throw ParseError("vocabulary must start with <pad>, <start>, <end>, <unk>");
    }
    reindex();
    if (token_to_id_.size() != id_to_token_.size()) throw ParseError("vocabulary has duplicate tokens");
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  int id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }
  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }
  const std::string& token(int id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  std::vector<int> encode(const TokenList& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }

  TokenList decode(const std::vector<int>& ids) const {
    TokenList out;
    out.reserve(ids.size());
    for (int i : ids) out.push_back(token(i));
    return out;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : id_to_token_) {
      h = fnv1a64(t.data(), t.size(), h);
      const char sep = '\n';
      h = fnv1a64(&sep, 1, h);
    }
    return h;
  }

  nlohmann::json to_json() const { return nlohmann::json{{"tokens", id_to_token_}}; }
  static Vocabulary from_json(const nlohmann::json& j) {
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write vocabulary file: " + path);
    out << to_json().dump(1) << '\n';
  }
  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open vocabulary file: " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("vocabulary file " + path + ": " + e.what());
    }
  }

 private:
  void reindex() {
    token_to_id_.clear();
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
      token_to_id_.emplace(id_to_token_[i], static_cast<int>(i));
    }
  }

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Counts question and answer tokens; keeps those seen at least min_count
// times, ordered by frequency (descending) then lexicographically.
inline Vocabulary build_vocabulary(const std::vector<QASample>& samples, int min_count = 1) {
  std::map<std::string, long> counts;
  for (const auto& s : samples) {
    for (const auto& t : s.question) ++counts[t];
    for (const auto& a : s.answers) {
      for (const auto& t : a) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, c] : counts) {
    if (c < min_count) continue;
    if (tok == kPadToken || tok == kStartToken || tok == kEndToken || tok == kUnkToken) continue;
    kept.emplace_back(tok, c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> ids{kPadToken, kStartToken, kEndToken, kUnkToken};
  for (auto& [tok, c] : kept) ids.push_back(tok);
  return Vocabulary(std::move(ids));
}

}  // namespace sceneqa
