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
#include <random>
#include <string>
#include <vector>

#include "sceneqa/core/autograd.hpp"
#include "sceneqa/model/parameters.hpp"

namespace sceneqa {

// Dropout is active only when `training` is set and an rng is supplied.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

template <typename T>
Tensor<T> maybe_dropout(const Tensor<T>& x, double p, const ForwardContext& ctx) {
  if (!ctx.training || ctx.rng == nullptr || p <= 0.0) return x;
  return ad::dropout(x, static_cast<T>(p), *ctx.rng);
}

template <typename T>
struct Linear {
  Tensor<T> weight;  // in x out
  Tensor<T> bias;    // 1 x out

  template <typename Rng>
  Linear(ParameterStore<T>& store, const std::string& name, int in, int out, Rng& rng)
      : weight(store.add(name + ".weight", xavier_uniform<T>(in, out, rng))),
        bias(store.add(name + ".bias", Matrix<T>::Zero(1, out))) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return ad::add_row(ad::matmul(x, weight), bias); }
};

template <typename T>
struct LayerNorm {
  Tensor<T> gain;
  Tensor<T> bias;

  LayerNorm(ParameterStore<T>& store, const std::string& name, int dim)
      : gain(store.add(name + ".gain", Matrix<T>::Ones(1, dim))),
        bias(store.add(name + ".bias", Matrix<T>::Zero(1, dim))) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return ad::layer_norm(x, gain, bias); }
};

template <typename T>
struct MultiHeadAttention {
  Linear<T> query;
  Linear<T> key;
  Linear<T> value;
  Linear<T> output;
  int heads;
  int head_dim;

  template <typename Rng>
  MultiHeadAttention(ParameterStore<T>& store, const std::string& name, int d_model, int num_heads, Rng& rng)
      : query(store, name + ".query", d_model, d_model, rng),
        key(store, name + ".key", d_model, d_model, rng),
        value(store, name + ".value", d_model, d_model, rng),
        output(store, name + ".output", d_model, d_model, rng),
        heads(num_heads),
        head_dim(d_model / num_heads) {}

  // queries: n x d, memory: m x d, mask: n x m additive (0 or -inf) or null.
  Tensor<T> operator()(const Tensor<T>& queries, const Tensor<T>& memory, const Matrix<T>* mask) const {
    const Tensor<T> q = query(queries);
    const Tensor<T> k = key(memory);
    const Tensor<T> v = value(memory);
    const T inv_scale = T(1) / std::sqrt(static_cast<T>(head_dim));
    std::vector<Tensor<T>> per_head;
    per_head.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      const Tensor<T> qh = ad::slice_cols(q, h * head_dim, head_dim);
      const Tensor<T> kh = ad::slice_cols(k, h * head_dim, head_dim);
      const Tensor<T> vh = ad::slice_cols(v, h * head_dim, head_dim);
      const Tensor<T> scores = ad::scale(ad::matmul_bt(qh, kh), inv_scale);
      per_head.push_back(ad::matmul(ad::masked_softmax(scores, mask), vh));
    }
    return output(heads == 1 ? per_head.front() : ad::concat_cols(per_head));
  }
};

template <typename T>
struct FeedForward {
  Linear<T> in;
  Linear<T> out;

  template <typename Rng>
  FeedForward(ParameterStore<T>& store, const std::string& name, int d_model, int ffn_dim, Rng& rng)
      : in(store, name + ".in", d_model, ffn_dim, rng), out(store, name + ".out", ffn_dim, d_model, rng) {}

  Tensor<T> operator()(const Tensor<T>& x, double dropout, const ForwardContext& ctx) const {
    return out(maybe_dropout(ad::relu(in(x)), dropout, ctx));
  }
};

// Post-norm encoder layer: self-attention then feed-forward, each wrapped in
// residual + layer norm.
template <typename T>
struct EncoderLayer {
  MultiHeadAttention<T> self_attention;
  LayerNorm<T> norm1;
  FeedForward<T> ffn;
  LayerNorm<T> norm2;

  template <typename Rng>
  EncoderLayer(ParameterStore<T>& store, const std::string& name, int d, int heads, int ffn_dim, Rng& rng)
      : self_attention(store, name + ".self_attention", d, heads, rng),
        norm1(store, name + ".norm1", d),
        ffn(store, name + ".ffn", d, ffn_dim, rng),
        norm2(store, name + ".norm2", d) {}

  Tensor<T> operator()(const Tensor<T>& x, const Matrix<T>* mask, double dropout, const ForwardContext& ctx) const {
    Tensor<T> h = norm1(ad::add(x, maybe_dropout(self_attention(x, x, mask), dropout, ctx)));
    return norm2(ad::add(h, maybe_dropout(ffn(h, dropout, ctx), dropout, ctx)));
  }
};

template <typename T>
struct DecoderLayer {
  MultiHeadAttention<T> self_attention;
  LayerNorm<T> norm1;
  MultiHeadAttention<T> cross_attention;
  LayerNorm<T> norm2;
  FeedForward<T> ffn;
  LayerNorm<T> norm3;

  template <typename Rng>
  DecoderLayer(ParameterStore<T>& store, const std::string& name, int d, int heads, int ffn_dim, Rng& rng)
      : self_attention(store, name + ".self_attention", d, heads, rng),
        norm1(store, name + ".norm1", d),
        cross_attention(store, name + ".cross_attention", d, heads, rng),
        norm2(store, name + ".norm2", d),
        ffn(store, name + ".ffn", d, ffn_dim, rng),
        norm3(store, name + ".norm3", d) {}

  Tensor<T> operator()(const Tensor<T>& x, const Tensor<T>& memory, const Matrix<T>* causal_mask,
                       const Matrix<T>* memory_mask, double dropout, const ForwardContext& ctx) const {
    Tensor<T> h = norm1(ad::add(x, maybe_dropout(self_attention(x, x, causal_mask), dropout, ctx)));
    h = norm2(ad::add(h, maybe_dropout(cross_attention(h, memory, memory_mask), dropout, ctx)));
    return norm3(ad::add(h, maybe_dropout(ffn(h, dropout, ctx), dropout, ctx)));
  }
};

// Sinusoidal positional encoding rows for positions [0, length).
template <typename T>
Matrix<T> sinusoidal_encoding(Eigen::Index length, Eigen::Index dim) {
  Matrix<T> pe(length, dim);
  for (Eigen::Index pos = 0; pos < length; ++pos) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Eigen::Index pair = i - (i % 2);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(pair) / static_cast<double>(dim));
      pe(pos, i) = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

template <typename T>
Matrix<T> causal_mask(Eigen::Index n) {
  Matrix<T> m = Matrix<T>::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r + 1; c < n; ++c) m(r, c) = -std::numeric_limits<T>::infinity();
  }
  return m;
}

}  // namespace sceneqa
