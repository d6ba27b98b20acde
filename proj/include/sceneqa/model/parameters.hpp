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

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sceneqa/core/autograd.hpp"
#include "sceneqa/corpus/vocabulary.hpp"

namespace sceneqa {

// Ordered, named collection of trainable tensors.
template <typename T>
class ParameterStore {
 public:
  Tensor<T> add(std::string name, Matrix<T> init) {
    for (const auto& [n, t] : items_) {
      if (n == name) throw std::logic_error("duplicate parameter name: " + name);
    }
    Tensor<T> p = Tensor<T>::parameter(std::move(init));
    p.set_requires_grad(!frozen_);
    items_.emplace_back(std::move(name), p);
    return p;
  }

  const std::vector<std::pair<std::string, Tensor<T>>>& items() const { return items_; }

  Tensor<T> find(const std::string& name) const {
    for (const auto& [n, t] : items_) {
      if (n == name) return t;
    }
    throw std::out_of_range("no parameter named " + name);
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += static_cast<std::size_t>(t.value().size());
    return n;
  }

  void zero_grad() {
    for (auto& [n, t] : items_) t.zero_grad();
  }

  // Frozen parameters never record gradients.
  void set_frozen(bool frozen) {
    frozen_ = frozen;
    for (auto& [n, t] : items_) t.set_requires_grad(!frozen);
  }
  bool frozen() const { return frozen_; }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [n, t] : items_) {
      h = fnv1a64(n.data(), n.size(), h);
      h = fnv1a64(t.value().data(), sizeof(T) * static_cast<std::size_t>(t.value().size()), h);
    }
    return h;
  }

  // Copies values from another store with identical names and shapes.
  template <typename U>
  void copy_from(const ParameterStore<U>& other) {
    if (other.items().size() != items_.size()) throw std::invalid_argument("parameter layouts differ");
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& [name, src] = other.items()[i];
      auto& [dst_name, dst] = items_[i];
      if (name != dst_name || src.rows() != dst.rows() || src.cols() != dst.cols()) {
        throw std::invalid_argument("parameter layouts differ at " + name);
      }
      dst.mutable_value() = src.value().template cast<T>();
    }
  }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> items_;
  bool frozen_ = false;
};

template <typename T, typename Rng>
Matrix<T> xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix<T> m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(u(rng));
  return m;
}

}  // namespace sceneqa
