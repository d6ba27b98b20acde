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
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sceneqa/core/errors.hpp"
#include "sceneqa/corpus/augment.hpp"
#include "sceneqa/decode/decode.hpp"
#include "sceneqa/model/checkpoint.hpp"
#include "sceneqa/model/qa_model.hpp"
#include "sceneqa/train/config.hpp"
#include "sceneqa/train/data.hpp"
#include "sceneqa/train/evaluate.hpp"
#include "sceneqa/train/losses.hpp"
#include "sceneqa/train/optimizer.hpp"
#include "sceneqa/train/rewards.hpp"

namespace sceneqa {

// Loss terms of one teacher-forced example. l_loc is undefined when the
// localization term is off.
template <typename T>
struct ExampleLoss {
  Tensor<T> l_ans;
  Tensor<T> l_loc;
  Tensor<T> logits;
  std::vector<int> targets;
};

template <typename T>
Tensor<T> total_of(const ExampleLoss<T>& l) {
  return l.l_loc.defined() ? ad::add(l.l_ans, l.l_loc) : l.l_ans;
}

inline bool wants_localization(const TrainConfig& cfg, Task task, const Example& ex) {
  return cfg.use_localization && task == Task::kVqa && !ex.sample->gt_boxes.empty();
}

inline LocalizationMode localization_mode(const TrainConfig& cfg) {
  return cfg.multi_object_bce ? LocalizationMode::kBinary : LocalizationMode::kCrossEntropy;
}

// Teacher-forced answer loss plus the localization loss. Target embeddings
// are conditioned on the ground-truth target proposal here.
template <typename T>
ExampleLoss<T> xe_example_loss(const QAModel<T>& model, const Example& ex, std::span<const int> text,
                               const TrainConfig& cfg, const ForwardContext& ctx = {}) {
  const Task task = model.config().task;
  const EncodedScene<T> enc = encode_example(model, ex, text, ctx);
  ExampleLoss<T> out;
  EncodedScene<T> memory = enc;
  const bool has_gt = !ex.sample->gt_boxes.empty();
  if (wants_localization(cfg, task, ex) || model.config().target_embeddings) {
    const LocalizationOutput<T> loc = model.localize(enc);
    if (wants_localization(cfg, task, ex)) {
      out.l_loc = localization_loss(loc.confidence, ex.localization, localization_mode(cfg));
    }
    if (model.config().target_embeddings) {
      memory = model.apply_target_embeddings(enc, has_gt ? ex.localization.label : loc.target_index);
    }
  }
  const TeacherForcing tf = teacher_forcing(ex.output(task), model.config().max_output_len());
  out.logits = model.decode_logits(memory, tf.prefix, ctx);
  out.l_ans = xe_loss(out.logits, tf.targets);
  out.targets = tf.targets;
  return out;
}

// Teacher-forced log-likelihood of a generated sequence, with the <end>
// step included when the sequence ended.
template <typename T>
Tensor<T> sequence_log_prob(const QAModel<T>& model, const EncodedScene<T>& memory, const DecodeResult& seq,
                            const ForwardContext& ctx = {}) {
  std::vector<int> prefix{kStartId};
  std::vector<int> targets = seq.tokens;
  if (seq.ended) {
    prefix.insert(prefix.end(), seq.tokens.begin(), seq.tokens.end());
    targets.push_back(kEndId);
  } else if (!seq.tokens.empty()) {
    prefix.insert(prefix.end(), seq.tokens.begin(), seq.tokens.end() - 1);
  } else {
    throw std::invalid_argument("sequence_log_prob: empty unterminated sequence");
  }
  return ad::sum_log_softmax_at(model.decode_logits(memory, prefix, ctx), targets);
}

// Policy-gradient surrogate -advantage * log p(sequence). The advantage is a
// plain number, so no gradient reaches the reward computation.
template <typename T>
Tensor<T> scst_surrogate(const Tensor<T>& log_prob, double advantage) {
  return ad::scale(log_prob, static_cast<T>(-advantage));
}

// One self-critical rollout: the gradient-bearing sequence, its baselines and
// the target proposal used to condition the decoder.
struct Rollout {
  DecodeResult sequence;
  std::vector<DecodeResult> baselines;
  int target_index = 0;
};

template <typename T, typename Rng>
Rollout scst_rollout(const QAModel<T>& model, const Example& ex, std::span<const int> text, const TrainConfig& cfg,
                     Rng& rng) {
  ad::NoGradGuard no_grad;
  const EncodedScene<T> enc = encode_example(model, ex, text);
  const LocalizationOutput<T> loc = model.localize(enc);
  const EncodedScene<T> memory = model.decoder_memory(enc, loc);
  const int max_len = model.config().max_output_len();
  const DecodeOptions opt{cfg.suppress_unk};
  Rollout r;
  r.target_index = loc.target_index;
  DecodeResult greedy = greedy_decode(model, memory, max_len, opt);
  if (cfg.scst_switched) {
    r.sequence = sample_decode(model, memory, max_len, cfg.temperature, rng, opt);
    r.baselines.push_back(std::move(greedy));
  } else {
    r.sequence = std::move(greedy);
    BeamSet beams = beam_decode(model, memory, std::min(cfg.beam_k, model.config().vocab_size), max_len, opt);
    r.baselines = std::move(beams.results);
  }
  return r;
}

// Sample-order stream of reshuffled epochs.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {}

  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    batch = std::min(batch, n_);
    while (out.size() < batch) {
      if (pos_ == order_.size()) {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct RunOptions {
  std::string checkpoint_path;  // best-validation checkpoint; empty to skip
  std::string log_path;         // JSON-lines metrics log; empty to skip
  std::string dump_path;        // diagnostic dump on non-finite loss
  // Checked after every validation; returning true ends the run there.
  std::function<bool(const EvalResult&)> stop_when;
};

struct TrainResult {
  std::vector<nlohmann::json> log;
  long iterations = 0;
  std::optional<EvalResult> initial_val;
  std::optional<EvalResult> final_val;
  double best_val_cider = -1.0;
  long best_iteration = -1;
};

// Owns the optimizer state for one training stage of one model.
template <typename T>
class Trainer {
 public:
  Trainer(QAModel<T>& model, const TrainingData& data, TrainConfig cfg, const QAModel<T>* vqg = nullptr)
      : model_(model),
        data_(data),
        cfg_(std::move(cfg)),
        vqg_(cfg_.stage == Stage::kScst && cfg_.vqg_reward ? vqg : nullptr),
        train_(make_examples(data.train, data)),
        val_(make_examples(data.val.empty() ? data.train : data.val, data)),
        sampler_(train_.size(), cfg_.seed),
        rng_(cfg_.seed ^ 0x9e3779b97f4a7c15ULL),
        adam_(model.parameters()) {
    cfg_.validate();
    if (cfg_.task != model.config().task) throw ConfigError("train: config task differs from the model task");
    if (train_.empty()) throw ConfigError("train: no training samples");
    if (cfg_.stage == Stage::kScst && cfg_.vqg_reward && vqg == nullptr) {
      throw ConfigError("train: the question-reconstruction reward needs a question generator checkpoint");
    }
    if (cfg_.stage == Stage::kScst) {
      reward_stats_ = build_reward_stats(data.train);
      scorer_.emplace(*reward_stats_, data.vocab, vqg_, DecodeOptions{cfg_.suppress_unk});
    }
  }

  const TrainConfig& config() const { return cfg_; }
  long iteration() const { return iteration_; }
  const std::vector<Example>& train_examples() const { return train_; }
  const std::vector<Example>& val_examples() const { return val_; }

  EvalResult validate() const { return evaluate(model_, val_, data_.vocab, DecodeOptions{cfg_.suppress_unk}); }

  // One optimizer step on the next batch; returns its log record.
  nlohmann::json step() {
    const std::vector<std::size_t> batch = sampler_.next(static_cast<std::size_t>(cfg_.batch_size));
    const double lr = cosine_lr(cfg_.effective_lr(), iteration_, cfg_.max_iterations);
    model_.parameters().zero_grad();
    nlohmann::json rec = cfg_.stage == Stage::kXe ? xe_batch(batch) : scst_batch(batch);
    const double grad_norm = clip_grad_norm(model_.parameters(), cfg_.grad_clip);
    adam_.step(lr);
    rec["iteration"] = iteration_;
    rec["lr"] = lr;
    rec["grad_norm"] = grad_norm;
    ++iteration_;
    return rec;
  }

  TrainResult run(const RunOptions& run = {}) {
    TrainResult result;
    std::ofstream log_file;
    if (!run.log_path.empty()) {
      log_file.open(run.log_path, std::ios::app);
      if (!log_file) throw TrainingError("cannot open metrics log " + run.log_path);
    }
    auto emit = [&](const nlohmann::json& rec) {
      result.log.push_back(rec);
      if (log_file) log_file << rec.dump() << '\n' << std::flush;
    };
    auto validate_at = [&](long it) {
      EvalResult r = validate();
      const double cider = score_of(r, metrics::Metric::kCider);
      emit(nlohmann::json{{"iteration", it}, {"val", to_json(r)}});
      if (cider > result.best_val_cider) {
        result.best_val_cider = cider;
        result.best_iteration = it;
        if (!run.checkpoint_path.empty()) save(run.checkpoint_path, it, cider);
      }
      return r;
    };
    auto stop = [&](const EvalResult& r) { return run.stop_when && run.stop_when(r); };
    result.initial_val = validate_at(iteration_);
    result.final_val = result.initial_val;
    dump_path_ = run.dump_path;
    bool stopped = stop(*result.initial_val);
    while (!stopped && iteration_ < cfg_.max_iterations) {
      nlohmann::json rec = step();
      const bool last = iteration_ == cfg_.max_iterations;
      if (cfg_.log_every > 0 && (iteration_ % cfg_.log_every == 0 || last)) emit(rec);
      if (last || (cfg_.val_every > 0 && iteration_ % cfg_.val_every == 0)) {
        result.final_val = validate_at(iteration_);
        stopped = stop(*result.final_val);
      }
    }
    result.iterations = iteration_;
    return result;
  }

  void save(const std::string& path, long it, double val_cider) const {
    nlohmann::json extra{{"train_config", cfg_}, {"iteration", it}, {"val_cider", val_cider}};
    save_checkpoint(path, make_checkpoint(model_, data_.vocab, std::move(extra)));
  }

 private:
  std::vector<int> input_text(const Example& ex) {
    const std::vector<int>& text = ex.input(cfg_.task);
    if (!cfg_.augment || cfg_.task != Task::kVqa || text.empty()) return text;
    return augment_question_ids(text, rng_);
  }

  nlohmann::json xe_batch(const std::vector<std::size_t>& batch) {
    const ForwardContext ctx{true, &rng_};
    const T inv = T(1) / static_cast<T>(batch.size());
    double l_ans = 0.0;
    double l_loc = 0.0;
    int correct = 0;
    int total = 0;
    int fallbacks = 0;
    bool any_loc = false;
    std::vector<double> per_sample;
    for (std::size_t i : batch) {
      const Example& ex = train_[i];
      const std::vector<int> text = input_text(ex);
      const ExampleLoss<T> loss = xe_example_loss(model_, ex, text, cfg_, ctx);
      const Tensor<T> total_loss = total_of(loss);
      per_sample.push_back(static_cast<double>(total_loss.item()));
      l_ans += static_cast<double>(loss.l_ans.item());
      if (loss.l_loc.defined()) {
        any_loc = true;
        l_loc += static_cast<double>(loss.l_loc.item());
        fallbacks += ex.localization.fallback ? 1 : 0;
      }
      total += token_accuracy_counts(loss.logits.value(), loss.targets, correct);
      check_finite(per_sample.back(), batch, per_sample);
      ad::scale(total_loss, inv).backward();
    }
    const double n = static_cast<double>(batch.size());
    nlohmann::json rec{{"stage", "xe"}, {"l_ans", l_ans / n}, {"token_accuracy", total ? double(correct) / total : 0.0}};
    double loss = l_ans / n;
    if (any_loc) {
      rec["l_loc"] = l_loc / n;
      rec["loc_fallbacks"] = fallbacks;
      loss += l_loc / n;
    }
    rec["loss"] = loss;
    return rec;
  }

  nlohmann::json scst_batch(const std::vector<std::size_t>& batch) {
    const ForwardContext ctx{true, &rng_};
    const T inv = T(1) / static_cast<T>(batch.size());
    double l_cider = 0.0;
    double l_loc = 0.0;
    bool any_loc = false;
    int fallbacks = 0;
    double r_vqa_g = 0.0, r_vqa_b = 0.0, r_vqg_g = 0.0, r_vqg_b = 0.0;
    std::vector<double> advantages;
    std::vector<double> per_sample;
    for (std::size_t i : batch) {
      const Example& ex = train_[i];
      const std::vector<int> text = input_text(ex);
      const Rollout roll = scst_rollout(model_, ex, text, cfg_, rng_);
      std::vector<std::vector<int>> baselines;
      for (const auto& b : roll.baselines) baselines.push_back(b.tokens);
      const RewardBundle rewards = scorer_->score(roll.sequence.tokens, baselines, ex);
      advantages.push_back(rewards.advantage);
      r_vqa_g += rewards.r_vqa_g;
      r_vqa_b += rewards.r_vqa_b;
      if (rewards.r_vqg_g) {
        r_vqg_g += *rewards.r_vqg_g;
        r_vqg_b += *rewards.r_vqg_b;
      }

      const EncodedScene<T> enc = encode_example(model_, ex, text, ctx);
      EncodedScene<T> memory = enc;
      Tensor<T> loc_loss;
      if (wants_localization(cfg_, cfg_.task, ex) || model_.config().target_embeddings) {
        const LocalizationOutput<T> loc = model_.localize(enc);
        if (wants_localization(cfg_, cfg_.task, ex)) {
          loc_loss = localization_loss(loc.confidence, ex.localization, localization_mode(cfg_));
          fallbacks += ex.localization.fallback ? 1 : 0;
        }
        if (model_.config().target_embeddings) memory = model_.apply_target_embeddings(enc, roll.target_index);
      }
      Tensor<T> loss = scst_surrogate(sequence_log_prob(model_, memory, roll.sequence, ctx), rewards.advantage);
      l_cider += static_cast<double>(loss.item());
      if (loc_loss.defined()) {
        any_loc = true;
        l_loc += static_cast<double>(loc_loss.item());
        loss = ad::add(loss, loc_loss);
      }
      per_sample.push_back(static_cast<double>(loss.item()));
      check_finite(per_sample.back(), batch, per_sample);
      ad::scale(loss, inv).backward();
    }
    const double n = static_cast<double>(batch.size());
    const double mean_adv = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean_adv) * (a - mean_adv);
    nlohmann::json rec{{"stage", "scst"},
                       {"baseline", cfg_.scst_switched ? "greedy" : "beam"},
                       {"l_cider", l_cider / n},
                       {"r_vqa_g", r_vqa_g / n},
                       {"r_vqa_b", r_vqa_b / n},
                       {"advantage", mean_adv},
                       {"advantage_std", std::sqrt(var / n)}};
    if (scorer_->uses_vqg()) {
      rec["r_vqg_g"] = r_vqg_g / n;
      rec["r_vqg_b"] = r_vqg_b / n;
    }
    double loss = l_cider / n;
    if (any_loc) {
      rec["l_loc"] = l_loc / n;
      rec["loc_fallbacks"] = fallbacks;
      loss += l_loc / n;
    }
    rec["loss"] = loss;
    return rec;
  }

  void check_finite(double loss, const std::vector<std::size_t>& batch, const std::vector<double>& per_sample) const {
    if (std::isfinite(loss)) return;
    nlohmann::json dump{{"iteration", iteration_}, {"stage", to_string(cfg_.stage)}, {"samples", nlohmann::json::array()}};
    for (std::size_t j = 0; j < per_sample.size(); ++j) {
      const QASample& s = *train_[batch[j]].sample;
      dump["samples"].push_back({{"question_id", s.question_id},
                                 {"scene_id", s.scene_id},
                                 {"loss", std::isfinite(per_sample[j]) ? nlohmann::json(per_sample[j]) : nlohmann::json("non-finite")}});
    }
    std::string where;
    if (!dump_path_.empty()) {
      std::ofstream(dump_path_) << dump.dump(2) << '\n';
      where = "; batch written to " + dump_path_;
    }
    throw TrainingError("non-finite loss at iteration " + std::to_string(iteration_) + " on sample " +
                        train_[batch[per_sample.size() - 1]].sample->question_id + where);
  }

  QAModel<T>& model_;
  const TrainingData& data_;
  TrainConfig cfg_;
  const QAModel<T>* vqg_;
  std::vector<Example> train_;
  std::vector<Example> val_;
  BatchSampler sampler_;
  std::mt19937_64 rng_;
  Adam<T> adam_;
  std::optional<RewardStats> reward_stats_;
  std::optional<RewardScorer<T>> scorer_;
  long iteration_ = 0;
  std::string dump_path_;
};

// Runs one training stage. The self-critical stage starts from `init` (an
// XE-trained checkpoint), which is required.
template <typename T>
TrainResult train_stage(QAModel<T>& model, const TrainingData& data, const TrainConfig& cfg,
                        const Checkpoint* init = nullptr, const QAModel<T>* vqg = nullptr,
                        const RunOptions& run = {}) {
  if (cfg.stage == Stage::kScst && init == nullptr) {
    throw ConfigError("train: the scst stage needs an xe checkpoint to start from");
  }
  if (init != nullptr) restore(model, *init, data.vocab);
  Trainer<T> trainer(model, data, cfg, vqg);
  return trainer.run(run);
}

// Trains the question generator with XE (answer in, question out) and
// freezes it afterwards.
template <typename T>
TrainResult train_vqg(QAModel<T>& vqg, const TrainingData& data, TrainConfig cfg, const RunOptions& run = {}) {
  if (vqg.config().task != Task::kVqg) throw ConfigError("train_vqg: model is not a question generator");
  cfg.task = Task::kVqg;
  cfg.stage = Stage::kXe;
  vqg.parameters().set_frozen(false);
  TrainResult result = Trainer<T>(vqg, data, cfg).run(run);
  vqg.parameters().set_frozen(true);
  return result;
}

}  // namespace sceneqa
