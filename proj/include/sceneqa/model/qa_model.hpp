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

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sceneqa/corpus/embeddings.hpp"
#include "sceneqa/corpus/types.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/model/config.hpp"
#include "sceneqa/model/layers.hpp"

namespace sceneqa {

class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Model-side proposal inputs, optionally padded. valid[i] == 0 marks padding.
template <typename T>
struct ProposalInput {
  Matrix<T> features;  // P x F
  Matrix<T> centers;   // P x 3, normalized
  std::vector<char> valid;

  int size() const { return static_cast<int>(features.rows()); }
};

template <typename T>
ProposalInput<T> make_proposal_input(const ProposalSet& set, int pad_to = 0) {
  const int p = set.size();
  const int rows = std::max(p, pad_to);
  ProposalInput<T> in;
  in.features = Matrix<T>::Zero(rows, set.features.cols());
  in.centers = Matrix<T>::Zero(rows, 3);
  in.features.topRows(p) = set.features.cast<T>();
  in.centers.topRows(p) = set.centers.cast<T>();
  in.valid.assign(static_cast<std::size_t>(rows), 0);
  std::fill(in.valid.begin(), in.valid.begin() + p, 1);
  return in;
}

// Encoder output: [proposals; text] rows with a validity flag per row.
template <typename T>
struct EncodedScene {
  Tensor<T> sequence;  // L x d
  int num_proposals = 0;
  int num_text = 0;
  std::vector<char> valid;

  int length() const { return num_proposals + num_text; }
  std::pair<int, int> proposal_slice() const { return {0, num_proposals}; }
  std::pair<int, int> question_slice() const { return {num_proposals, num_text}; }
  bool has_padding() const {
    for (char v : valid) {
      if (!v) return true;
    }
    return false;
  }
  // n x L additive mask hiding padded keys, or an empty matrix when none.
  Matrix<T> key_mask(Eigen::Index n) const {
    if (!has_padding()) return {};
    Matrix<T> m = Matrix<T>::Zero(n, length());
    for (int c = 0; c < length(); ++c) {
      if (!valid[static_cast<std::size_t>(c)]) m.col(c).setConstant(-std::numeric_limits<T>::infinity());
    }
    return m;
  }
};

template <typename T>
struct LocalizationOutput {
  Tensor<T> confidence;  // P x 1; padded rows are -inf
  int target_index = 0;
};

// Lowest index wins ties.
template <typename Derived>
int argmax_lowest(const Eigen::DenseBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

// Early-concatenation encoder-decoder over object proposals and text tokens
// with a per-proposal localization head.
template <typename T>
class QAModel {
 public:
  QAModel(const ModelConfig& cfg, std::uint64_t seed, const EmbeddingTable* embeddings = nullptr)
      : cfg_(cfg), store_(std::make_unique<ParameterStore<T>>()) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    const int d = cfg_.d_model;
    projection_ = std::make_unique<Linear<T>>(*store_, "proposal_projection", cfg_.feature_dim, d, rng);
    Matrix<T> emb(cfg_.vocab_size, d);
    if (embeddings != nullptr) {
      if (embeddings->rows() != cfg_.vocab_size || embeddings->dim != d) {
        throw ShapeError("embedding table does not match vocab_size x d_model");
      }
      emb = embeddings->vectors.cast<T>();
    } else {
      std::normal_distribution<double> normal(0.0, 0.1);
      for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = static_cast<T>(normal(rng));
    }
    emb.row(kPadId).setZero();
    word_embeddings_ = store_->add("word_embeddings", std::move(emb));
    for (int l = 0; l < cfg_.encoder_layers; ++l) {
      encoder_.emplace_back(*store_, "encoder." + std::to_string(l), d, cfg_.heads, cfg_.ffn_dim, rng);
    }
    for (int l = 0; l < cfg_.decoder_layers; ++l) {
      decoder_.emplace_back(*store_, "decoder." + std::to_string(l), d, cfg_.heads, cfg_.ffn_dim, rng);
    }
    head_ = std::make_unique<Linear<T>>(*store_, "output_head", d, cfg_.vocab_size, rng);
    loc_hidden_ = std::make_unique<Linear<T>>(*store_, "localization.hidden", d, cfg_.loc_hidden, rng);
    loc_out_ = std::make_unique<Linear<T>>(*store_, "localization.out", cfg_.loc_hidden, 1, rng);
    Matrix<T> tgt(2, d);
    std::normal_distribution<double> small(0.0, 0.02);
    for (Eigen::Index i = 0; i < tgt.size(); ++i) tgt.data()[i] = static_cast<T>(small(rng));
    target_embeddings_ = store_->add("target_embeddings", std::move(tgt));
    positions_ = sinusoidal_encoding<T>(std::max(cfg_.max_input_len(), cfg_.max_output_len()), d);
  }

  QAModel(QAModel&&) noexcept = default;
  QAModel& operator=(QAModel&&) noexcept = default;

  const ModelConfig& config() const { return cfg_; }
  ParameterStore<T>& parameters() { return *store_; }
  const ParameterStore<T>& parameters() const { return *store_; }

  // Linear 32 -> d on every proposal, then the normalized center added onto
  // the last three output dimensions.
  Tensor<T> project_proposals(const Matrix<T>& features, const Matrix<T>& centers) const {
    if (features.cols() != cfg_.feature_dim || centers.cols() != 3 || centers.rows() != features.rows()) {
      throw ShapeError("project_proposals: expected P x " + std::to_string(cfg_.feature_dim) +
                       " features and P x 3 centers");
    }
    Matrix<T> pos = Matrix<T>::Zero(features.rows(), cfg_.d_model);
    pos.rightCols(3) = centers;
    return ad::add((*projection_)(Tensor<T>::constant(features)), Tensor<T>::constant(std::move(pos)));
  }

  // Word embedding lookup plus sinusoidal position encoding.
  Tensor<T> embed_tokens(std::span<const int> ids) const {
    const Tensor<T> words = ad::gather_rows(word_embeddings_, ids);
    const auto n = static_cast<Eigen::Index>(ids.size());
    Matrix<T> pe = n <= positions_.rows() ? Matrix<T>(positions_.topRows(n)) : sinusoidal_encoding<T>(n, cfg_.d_model);
    return ad::add(words, Tensor<T>::constant(std::move(pe)));
  }
  Tensor<T> embed_question(std::span<const int> ids) const { return embed_tokens(ids); }

  EncodedScene<T> encode(const Tensor<T>& projected, const Tensor<T>& text, std::vector<char> proposal_valid,
                         std::vector<char> text_valid, const ForwardContext& ctx = {}) const {
    if (projected.cols() != cfg_.d_model || text.cols() != cfg_.d_model) throw ShapeError("encode: width != d_model");
    if (proposal_valid.empty()) proposal_valid.assign(static_cast<std::size_t>(projected.rows()), 1);
    if (text_valid.empty()) text_valid.assign(static_cast<std::size_t>(text.rows()), 1);
    if (static_cast<Eigen::Index>(proposal_valid.size()) != projected.rows() ||
        static_cast<Eigen::Index>(text_valid.size()) != text.rows()) {
      throw ShapeError("encode: mask length mismatch");
    }
    EncodedScene<T> out;
    out.num_proposals = static_cast<int>(projected.rows());
    out.num_text = static_cast<int>(text.rows());
    out.valid = std::move(proposal_valid);
    out.valid.insert(out.valid.end(), text_valid.begin(), text_valid.end());
    Tensor<T> x = ad::concat_rows<T>({projected, text});
    const Matrix<T> mask = out.key_mask(out.length());
    const Matrix<T>* mask_ptr = mask.size() ? &mask : nullptr;
    for (const auto& layer : encoder_) x = layer(x, mask_ptr, cfg_.dropout, ctx);
    out.sequence = x;
    return out;
  }

  EncodedScene<T> encode(const ProposalInput<T>& proposals, std::span<const int> text_ids,
                         const ForwardContext& ctx = {}) const {
    if (static_cast<int>(text_ids.size()) > cfg_.max_input_len()) {
      text_ids = text_ids.first(static_cast<std::size_t>(cfg_.max_input_len()));
    }
    return encode(project_proposals(proposals.features, proposals.centers), embed_tokens(text_ids), proposals.valid,
                  {}, ctx);
  }

  // Two-layer MLP score per encoded proposal row.
  LocalizationOutput<T> localize(const EncodedScene<T>& enc) const {
    if (enc.num_proposals < 1) throw ShapeError("localize: no proposals");
    const Tensor<T> rows = ad::slice_rows(enc.sequence, 0, enc.num_proposals);
    Tensor<T> conf = (*loc_out_)(ad::relu((*loc_hidden_)(rows)));
    bool padded = false;
    Matrix<T> mask = Matrix<T>::Zero(enc.num_proposals, 1);
    for (int i = 0; i < enc.num_proposals; ++i) {
      if (!enc.valid[static_cast<std::size_t>(i)]) {
        mask(i, 0) = -std::numeric_limits<T>::infinity();
        padded = true;
      }
    }
    if (padded) conf = ad::add(conf, Tensor<T>::constant(std::move(mask)));
    LocalizationOutput<T> out;
    out.target_index = argmax_lowest(conf.value().col(0));
    out.confidence = conf;
    return out;
  }

  // Adds e1 to the chosen proposal row and e0 to every other valid proposal.
  EncodedScene<T> apply_target_embeddings(const EncodedScene<T>& enc, int target_index) const {
    if (target_index < 0 || target_index >= enc.num_proposals) throw ShapeError("apply_target_embeddings: bad index");
    Matrix<T> select = Matrix<T>::Zero(enc.length(), 2);
    for (int i = 0; i < enc.num_proposals; ++i) {
      if (!enc.valid[static_cast<std::size_t>(i)]) continue;
      select(i, i == target_index ? 1 : 0) = T(1);
    }
    EncodedScene<T> out = enc;
    out.sequence = ad::add(enc.sequence, ad::matmul(Tensor<T>::constant(std::move(select)), target_embeddings_));
    return out;
  }

  // What the decoder attends to: the encoder output, with target embeddings
  // added when that flag is on. Localization always reads the plain output.
  EncodedScene<T> decoder_memory(const EncodedScene<T>& enc, const LocalizationOutput<T>& loc) const {
    if (!cfg_.target_embeddings) return enc;
    return apply_target_embeddings(enc, loc.target_index);
  }

  // Logits for every prefix position (prefix[0] must be <start>).
  Tensor<T> decode_logits(const EncodedScene<T>& memory, std::span<const int> prefix,
                          const ForwardContext& ctx = {}) const {
    if (prefix.empty() || prefix.front() != kStartId) throw std::invalid_argument("decode_logits: prefix must begin with <start>");
    if (static_cast<int>(prefix.size()) > cfg_.max_output_len()) {
      throw LengthError("decode_logits: prefix of length " + std::to_string(prefix.size()) + " exceeds limit " +
                        std::to_string(cfg_.max_output_len()));
    }
    const auto n = static_cast<Eigen::Index>(prefix.size());
    Tensor<T> x = embed_tokens(prefix);
    const Matrix<T> causal = causal_mask<T>(n);
    const Matrix<T> mem_mask = memory.key_mask(n);
    const Matrix<T>* mem_mask_ptr = mem_mask.size() ? &mem_mask : nullptr;
    for (const auto& layer : decoder_) x = layer(x, memory.sequence, n > 1 ? &causal : nullptr, mem_mask_ptr, cfg_.dropout, ctx);
    return (*head_)(x);
  }

  const Tensor<T>& target_embedding_table() const { return target_embeddings_; }
  const Tensor<T>& word_embeddings() const { return word_embeddings_; }
  const std::vector<DecoderLayer<T>>& decoder_layers() const { return decoder_; }
  const Linear<T>& output_head() const { return *head_; }
  const Matrix<T>& positional_table() const { return positions_; }

 private:
  ModelConfig cfg_;
  std::unique_ptr<ParameterStore<T>> store_;
  std::unique_ptr<Linear<T>> projection_;
  Tensor<T> word_embeddings_;
  std::vector<EncoderLayer<T>> encoder_;
  std::vector<DecoderLayer<T>> decoder_;
  std::unique_ptr<Linear<T>> head_;
  std::unique_ptr<Linear<T>> loc_hidden_;
  std::unique_ptr<Linear<T>> loc_out_;
  Tensor<T> target_embeddings_;
  Matrix<T> positions_;
};

// Same architecture with the text roles swapped: the encoder reads
// [proposals; answer tokens] and the decoder writes the question. The new
// model owns a separate, freshly initialized parameter set.
template <typename T>
QAModel<T> swap_for_vqg(const QAModel<T>& vqa, std::uint64_t seed, const EmbeddingTable* embeddings = nullptr) {
  ModelConfig cfg = vqa.config();
  cfg.task = cfg.task == Task::kVqa ? Task::kVqg : Task::kVqa;
  return QAModel<T>(cfg, seed, embeddings);
}

}  // namespace sceneqa
