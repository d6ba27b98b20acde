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
#include <numbers>
#include <vector>

#include "sceneqa/model/parameters.hpp"

namespace sceneqa {

// Cosine annealing from base_lr at step 0 to zero at total_steps.
inline double cosine_lr(double base_lr, long step, long total_steps) {
  if (total_steps <= 0) return base_lr;
  const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping. max_norm <= 0 disables clipping.
template <typename T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : store.items()) {
    if (p.grad().size()) sq += p.grad().template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T factor = static_cast<T>(max_norm / (norm + 1e-12));
    for (auto [name, p] : store.items()) {
      if (p.grad().size()) p.mutable_grad() *= factor;
    }
  }
  return norm;
}

template <typename T>
class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  explicit Adam(ParameterStore<T>& store, Options opt = {}) : store_(store), opt_(opt) {
    for (const auto& [name, p] : store.items()) {
      m_.push_back(Matrix<T>::Zero(p.rows(), p.cols()));
      v_.push_back(Matrix<T>::Zero(p.rows(), p.cols()));
    }
  }

  // Parameters without a gradient this step are treated as having zero
  // gradient (their moments still decay).
  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(opt_.beta1);
    const T b2 = static_cast<T>(opt_.beta2);
    const auto& items = store_.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto p = items[i].second;
      if (!p.requires_grad()) continue;
      if (p.grad().size()) {
        m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad();
        v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad().cwiseProduct(p.grad());
      } else {
        m_[i] *= b1;
        v_[i] *= b2;
      }
      const T step_size = static_cast<T>(lr / bc1);
      const T denom_scale = static_cast<T>(1.0 / std::sqrt(bc2));
      p.mutable_value().array() -=
          step_size * m_[i].array() / (v_[i].array().sqrt() * denom_scale + static_cast<T>(opt_.eps));
    }
  }

  long steps() const { return t_; }

 private:
  ParameterStore<T>& store_;
  Options opt_;
  std::vector<Matrix<T>> m_;
  std::vector<Matrix<T>> v_;
  long t_ = 0;
};

}  // namespace sceneqa
