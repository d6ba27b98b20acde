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

#include <cctype>
#include <string>
#include <string_view>

#include "sceneqa/corpus/types.hpp"

namespace sceneqa {

// Lowercases, turns every punctuation character except the apostrophe into
// a separator and splits on whitespace. Used for questions, answers and
// metric inputs alike.
inline TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string cur;
  for (const char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    const bool sep = std::isspace(ch) || (std::ispunct(ch) && raw != '\'');
    if (sep) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string join(const TokenList& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace sceneqa
