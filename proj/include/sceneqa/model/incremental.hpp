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
#include <limits>
#include <vector>

#include "sceneqa/model/qa_model.hpp"

namespace sceneqa {

// Inference-only decoder that consumes one token per call, caching the
// self-attention keys/values of earlier positions and the cross-attention
// projections of the memory. Produces the same logits as
// QAModel::decode_logits with dropout off.
template <typename T>
class IncrementalDecoder {
 public:
  struct State {
    std::vector<Matrix<T>> keys;    // per layer, t x d
    std::vector<Matrix<T>> values;  // per layer, t x d
    int length = 0;
  };

  IncrementalDecoder(const QAModel<T>& model, const EncodedScene<T>& memory) : model_(model) {
    const auto& layers = model.decoder_layers();
    const Matrix<T>& mem = memory.sequence.value();
    for (const auto& layer : layers) {
      const auto& ca = layer.cross_attention;
      Matrix<T> k = mem * ca.key.weight.value();
      k.rowwise() += ca.key.bias.value().row(0);
      Matrix<T> v = mem * ca.value.weight.value();
      v.rowwise() += ca.value.bias.value().row(0);
      memory_keys_.push_back(std::move(k));
      memory_values_.push_back(std::move(v));
    }
    memory_mask_ = RowVector<T>::Zero(memory.length());
    for (int i = 0; i < memory.length(); ++i) {
      if (!memory.valid[static_cast<std::size_t>(i)]) memory_mask_(i) = -std::numeric_limits<T>::infinity();
    }
  }

  State initial_state() const {
    State s;
    s.keys.resize(model_.decoder_layers().size());
    s.values.resize(model_.decoder_layers().size());
    return s;
  }

  // Appends `token` at the next position and returns that position's logits.
  RowVector<T> advance(State& state, int token) const {
    const ModelConfig& cfg = model_.config();
    if (state.length >= cfg.max_output_len()) throw LengthError("incremental decode past max_output_len");
    RowVector<T> x = model_.word_embeddings().value().row(token) + model_.positional_table().row(state.length);
    const auto& layers = model_.decoder_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      const auto& sa = layer.self_attention;
      RowVector<T> q = linear(x, sa.query);
      append_row(state.keys[l], linear(x, sa.key));
      append_row(state.values[l], linear(x, sa.value));
      RowVector<T> a = attend(q, state.keys[l], state.values[l], nullptr, sa.heads);
      x = norm(x + linear(a, sa.output), layer.norm1);
      const auto& ca = layer.cross_attention;
      RowVector<T> cq = linear(x, ca.query);
      RowVector<T> c = attend(cq, memory_keys_[l], memory_values_[l], &memory_mask_, ca.heads);
      x = norm(x + linear(c, ca.output), layer.norm2);
      RowVector<T> h = linear(x, layer.ffn.in).cwiseMax(T(0));
      x = norm(x + linear(h, layer.ffn.out), layer.norm3);
    }
    ++state.length;
    return linear(x, model_.output_head());
  }

 private:
  static RowVector<T> linear(const RowVector<T>& x, const Linear<T>& lin) {
    return x * lin.weight.value() + lin.bias.value();
  }

  static RowVector<T> norm(const RowVector<T>& x, const LayerNorm<T>& ln) {
    const T mean = x.mean();
    const T var = (x.array() - mean).square().mean();
    const T inv = T(1) / std::sqrt(var + T(1e-5));
    return ((x.array() - mean) * inv * ln.gain.value().row(0).array() + ln.bias.value().row(0).array()).matrix();
  }

  static void append_row(Matrix<T>& m, const RowVector<T>& row) {
    m.conservativeResize(m.rows() + 1, row.cols());
    m.row(m.rows() - 1) = row;
  }

  RowVector<T> attend(const RowVector<T>& q, const Matrix<T>& keys, const Matrix<T>& values, const RowVector<T>* mask,
                      int heads) const {
    const auto d = q.cols();
    const auto dh = d / heads;
    const T inv_scale = T(1) / std::sqrt(static_cast<T>(dh));
    RowVector<T> out(d);
    for (int h = 0; h < heads; ++h) {
      RowVector<T> s = (q.middleCols(h * dh, dh) * keys.middleCols(h * dh, dh).transpose()) * inv_scale;
      if (mask != nullptr) s += *mask;
      const T mx = s.maxCoeff();
      s = (s.array() - mx).exp();
      if (mask != nullptr) s = (mask->array() == -std::numeric_limits<T>::infinity()).select(T(0), s);
      s /= s.sum();
      out.middleCols(h * dh, dh) = s * values.middleCols(h * dh, dh);
    }
    return out;
  }

  const QAModel<T>& model_;
  std::vector<Matrix<T>> memory_keys_;
  std::vector<Matrix<T>> memory_values_;
  RowVector<T> memory_mask_;
};

}  // namespace sceneqa
