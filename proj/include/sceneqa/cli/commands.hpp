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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sceneqa/corpus/dataset_io.hpp"
#include "sceneqa/corpus/embeddings.hpp"
#include "sceneqa/corpus/proposals_io.hpp"
#include "sceneqa/corpus/synthetic.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/model/checkpoint.hpp"
#include "sceneqa/train/trainer.hpp"

namespace sceneqa::cli {

namespace fs = std::filesystem;

// Bad flag combination or missing prerequisite; the tool exits with 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout of a prepared data directory.
inline constexpr const char* kTrainFile = "train.json";
inline constexpr const char* kValFile = "val.json";
inline constexpr const char* kTestFile = "test.json";
inline constexpr const char* kVocabFile = "vocab.json";
inline constexpr const char* kProposalDir = "proposals";

// ---------------------------------------------------------------------------
// Run configuration: "key = value" lines, '#' starts a comment. Training keys
// use the TrainConfig field names; model keys carry a "model." prefix, e.g.
//   stage = xe
//   batch_size = 16
//   model.d_model = 96
// ---------------------------------------------------------------------------

struct RunConfig {
  TrainConfig train;
  ModelConfig model;
};

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename N>
N parse_number(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  N out{};
  ss >> out;
  if (!ss || !ss.eof()) throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

inline void apply_setting(RunConfig& rc, const std::string& key, const std::string& value) {
  TrainConfig& t = rc.train;
  ModelConfig& m = rc.model;
  if (key == "stage") t.stage = parse_stage(value);
  else if (key == "task") t.task = m.task = parse_task(value);
  else if (key == "lr") t.lr = parse_number<double>(key, value);
  else if (key == "batch_size") t.batch_size = parse_number<int>(key, value);
  else if (key == "beam_k") t.beam_k = parse_number<int>(key, value);
  else if (key == "vqg_reward") t.vqg_reward = parse_bool(key, value);
  else if (key == "multi_object_bce") t.multi_object_bce = m.multi_object_bce = parse_bool(key, value);
  else if (key == "use_localization") t.use_localization = m.use_localization = parse_bool(key, value);
  else if (key == "scst_switched") t.scst_switched = parse_bool(key, value);
  else if (key == "augment") t.augment = parse_bool(key, value);
  else if (key == "max_iterations") t.max_iterations = parse_number<long>(key, value);
  else if (key == "val_every") t.val_every = parse_number<long>(key, value);
  else if (key == "log_every") t.log_every = parse_number<long>(key, value);
  else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "grad_clip") t.grad_clip = parse_number<double>(key, value);
  else if (key == "temperature") t.temperature = parse_number<double>(key, value);
  else if (key == "suppress_unk") t.suppress_unk = parse_bool(key, value);
  else if (key == "model.d_model") m.d_model = parse_number<int>(key, value);
  else if (key == "model.encoder_layers") m.encoder_layers = parse_number<int>(key, value);
  else if (key == "model.decoder_layers") m.decoder_layers = parse_number<int>(key, value);
  else if (key == "model.heads") m.heads = parse_number<int>(key, value);
  else if (key == "model.ffn_dim") m.ffn_dim = parse_number<int>(key, value);
  else if (key == "model.dropout") m.dropout = parse_number<double>(key, value);
  else if (key == "model.max_answer_len") m.max_answer_len = parse_number<int>(key, value);
  else if (key == "model.max_question_len") m.max_question_len = parse_number<int>(key, value);
  else if (key == "model.p_max") m.p_max = parse_number<int>(key, value);
  else if (key == "model.loc_hidden") m.loc_hidden = parse_number<int>(key, value);
  else if (key == "model.target_embeddings") m.target_embeddings = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Applies one "key=value" assignment.
inline void apply_assignment(RunConfig& rc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  apply_setting(rc, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

inline void apply_config_text(RunConfig& rc, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    try {
      apply_assignment(rc, line);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(rc, ss.str());
}

// ---------------------------------------------------------------------------
// Prepared data directories.
// ---------------------------------------------------------------------------

struct PreparedData {
  TrainingData data;
  std::vector<QASample> test;
};

inline void load_scene_proposals(const std::string& dir, const std::vector<QASample>& samples,
                                 std::map<std::string, ProposalSet>& out) {
  for (const auto& s : samples) {
    if (!out.count(s.scene_id)) out.emplace(s.scene_id, load_proposals(dir, s.scene_id));
  }
}

inline PreparedData load_prepared(const std::string& dir) {
  const fs::path root(dir);
  PreparedData p;
  p.data.vocab = Vocabulary::load((root / kVocabFile).string());
  p.data.train = load_dataset((root / kTrainFile).string(), Split::kTrain);
  if (fs::exists(root / kValFile)) p.data.val = load_dataset((root / kValFile).string(), Split::kVal);
  if (fs::exists(root / kTestFile)) p.test = load_dataset((root / kTestFile).string(), Split::kTest);
  const std::string pdir = (root / kProposalDir).string();
  load_scene_proposals(pdir, p.data.train, p.data.proposals);
  load_scene_proposals(pdir, p.data.val, p.data.proposals);
  load_scene_proposals(pdir, p.test, p.data.proposals);
  return p;
}

inline const std::vector<QASample>& split_samples(const PreparedData& p, Split split) {
  switch (split) {
    case Split::kTrain: return p.data.train;
    case Split::kVal: return p.data.val;
    case Split::kTest: return p.test;
  }
  return p.data.train;
}

struct CorpusStats {
  std::size_t train_records = 0;
  std::size_t train_samples = 0;  // after multi-answer expansion
  std::size_t val_samples = 0;
  std::size_t test_samples = 0;
  std::size_t scenes = 0;
  int vocab_size = 0;
};

inline void print_stats(std::ostream& out, const CorpusStats& s) {
  out << "train records      " << s.train_records << "\n"
      << "train samples      " << s.train_samples << " (+" << s.train_samples - s.train_records
      << " from multi-answer expansion)\n"
      << "val samples        " << s.val_samples << "\n"
      << "test samples       " << s.test_samples << "\n"
      << "scenes             " << s.scenes << "\n"
      << "vocabulary         " << s.vocab_size << "\n";
}

inline nlohmann::json record_array(const std::vector<QASample>& samples, bool with_answers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json rec = to_record(s);
    if (!with_answers) rec.erase("answers");
    arr.push_back(std::move(rec));
  }
  return arr;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

// Writes records, vocabulary and proposals. The vocabulary is built from the
// expanded training samples only.
inline CorpusStats write_prepared(const std::string& out_dir, const nlohmann::json& train,
                                  const nlohmann::json& val, const nlohmann::json& test,
                                  const std::vector<ProposalSet>& proposals, int min_count) {
  const fs::path root(out_dir);
  fs::create_directories(root / kProposalDir);
  write_json(root / kTrainFile, train);
  write_json(root / kValFile, val);
  write_json(root / kTestFile, test);
  const auto train_samples = parse_dataset(train, Split::kTrain);
  const Vocabulary vocab = build_vocabulary(train_samples, min_count);
  vocab.save((root / kVocabFile).string());
  for (const auto& p : proposals) write_proposals((root / kProposalDir).string(), p);
  CorpusStats s;
  s.train_records = train.size();
  s.train_samples = train_samples.size();
  s.val_samples = val.size();
  s.test_samples = test.size();
  s.scenes = proposals.size();
  s.vocab_size = vocab.size();
  return s;
}

struct SyntheticPrepareOptions {
  SyntheticConfig generator;
  std::uint64_t seed = 1;
  int val_scenes = -1;  // -1: a quarter of the scenes, at least one when possible
  int min_count = 1;
};

// Scenes are split in order: the last val_scenes go to validation and their
// questions, without answers, also form the test split.
inline CorpusStats prepare_synthetic(const std::string& out_dir, const SyntheticPrepareOptions& opt) {
  const SyntheticDataset ds = generate_synthetic_dataset(opt.generator, opt.seed);
  const int n = opt.generator.num_scenes;
  int val_scenes = opt.val_scenes >= 0 ? opt.val_scenes : (n >= 2 ? std::max(1, n / 4) : 0);
  if (val_scenes >= n) throw UsageError("--val-scenes must leave at least one training scene");
  std::set<std::string> held_out;
  for (int i = n - val_scenes; i < n; ++i) held_out.insert(ds.scenes[static_cast<std::size_t>(i)].scene_id);
  std::vector<QASample> train;
  std::vector<QASample> val;
  for (const auto& s : ds.samples) (held_out.count(s.scene_id) ? val : train).push_back(s);
  return write_prepared(out_dir, record_array(train, true), record_array(val, true), record_array(val, false),
                        ds.proposals, opt.min_count);
}

struct ScanQaPrepareOptions {
  std::string train_path;
  std::string val_path;
  std::string test_path;  // optional
  std::string proposals_dir;
  int min_count = 1;
};

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Copies ScanQA-style records after validating them and gathers the proposal
// file of every referenced scene.
inline CorpusStats prepare_scanqa(const std::string& out_dir, const ScanQaPrepareOptions& opt) {
  const nlohmann::json train = read_json(opt.train_path);
  const nlohmann::json val = read_json(opt.val_path);
  const nlohmann::json test = opt.test_path.empty() ? nlohmann::json::array() : read_json(opt.test_path);
  std::set<std::string> scenes;
  for (const auto* split : {&train, &val, &test}) {
    const Split kind = split == &train ? Split::kTrain : split == &val ? Split::kVal : Split::kTest;
    for (const auto& s : parse_dataset(*split, kind)) scenes.insert(s.scene_id);
  }
  std::vector<ProposalSet> proposals;
  for (const auto& id : scenes) proposals.push_back(load_proposals(opt.proposals_dir, id));
  return write_prepared(out_dir, train, val, test, proposals, opt.min_count);
}

// ---------------------------------------------------------------------------
// Prediction records.
// ---------------------------------------------------------------------------

struct PredictionRecord {
  std::string scene_id;
  std::string question_id;
  std::vector<std::string> answer_top10;
  Box3 bbox;
};

inline nlohmann::json to_json(const PredictionRecord& r) {
  nlohmann::json corners = nlohmann::json::array();
  for (const auto& c : to_corners(r.bbox)) corners.push_back({c.x(), c.y(), c.z()});
  return nlohmann::json{{"scene_id", r.scene_id},
                        {"question_id", r.question_id},
                        {"answer_top10", r.answer_top10},
                        {"bbox", r.bbox.to_array()},
                        {"bbox_corners", corners}};
}

// Reads the center+extent form when present, the corner form otherwise.
inline PredictionRecord prediction_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  r.scene_id = j.at("scene_id").get<std::string>();
  r.question_id = j.at("question_id").get<std::string>();
  r.answer_top10 = j.at("answer_top10").get<std::vector<std::string>>();
  if (r.answer_top10.empty()) throw ParseError("prediction " + r.question_id + ": empty answer_top10");
  if (j.contains("bbox")) {
    const auto v = j.at("bbox").get<std::vector<double>>();
    if (v.size() != 6) throw ParseError("prediction " + r.question_id + ": bbox needs 6 values");
    r.bbox = Box3::from_array(std::span<const double, 6>(v.data(), 6));
  } else {
    std::vector<Eigen::Vector3d> corners;
    for (const auto& c : j.at("bbox_corners")) {
      const auto v = c.get<std::vector<double>>();
      if (v.size() != 3) throw ParseError("prediction " + r.question_id + ": corner needs 3 values");
      corners.emplace_back(v[0], v[1], v[2]);
    }
    if (corners.size() != 8) throw ParseError("prediction " + r.question_id + ": expected 8 corners");
    r.bbox = from_corners(corners);
  }
  return r;
}

inline std::vector<PredictionRecord> load_predictions(const std::string& path) {
  const nlohmann::json root = read_json(path);
  if (!root.is_array()) throw ParseError(path + ": expected a JSON array of predictions");
  std::vector<PredictionRecord> out;
  for (const auto& j : root) out.push_back(prediction_from_json(j));
  return out;
}

inline void save_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  write_json(path, arr);
}

// Greedy answer first, then the beam candidates not already listed, up to 10.
template <typename T>
PredictionRecord predict_one(const QAModel<T>& model, const Example& ex, const Vocabulary& vocab, int beam_width,
                             DecodeOptions opt = {}) {
  ad::NoGradGuard no_grad;
  const EncodedScene<T> enc = encode_example(model, ex, ex.question);
  const LocalizationOutput<T> loc = model.localize(enc);
  const EncodedScene<T> memory = model.decoder_memory(enc, loc);
  const int max_len = model.config().max_output_len();
  PredictionRecord r;
  r.scene_id = ex.sample->scene_id;
  r.question_id = ex.sample->question_id;
  r.bbox = ex.proposals->box(loc.target_index);
  r.answer_top10.push_back(join(vocab.decode(greedy_decode(model, memory, max_len, opt).tokens)));
  if (beam_width > 0) {
    const int k = std::min(beam_width, model.config().vocab_size);
    for (const auto& b : beam_decode(model, memory, k, max_len, opt).results) {
      if (r.answer_top10.size() >= 10) break;
      std::string answer = join(vocab.decode(b.tokens));
      if (std::find(r.answer_top10.begin(), r.answer_top10.end(), answer) == r.answer_top10.end()) {
        r.answer_top10.push_back(std::move(answer));
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Scoring.
// ---------------------------------------------------------------------------

struct MetricReport {
  metrics::Report scores;
  std::optional<double> acc_at_05;  // absent when no sample has a ground-truth box
  std::size_t count = 0;
};

inline double scaled(double v) { return std::round(v * 100.0 * 100.0) / 100.0; }

// Scores first answers against the samples' references and boxes.
inline MetricReport score_predictions(const std::vector<PredictionRecord>& records,
                                      const std::vector<QASample>& samples) {
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) {
    if (!by_id.emplace(r.question_id, &r).second) throw EvaluationError("duplicate prediction for " + r.question_id);
  }
  metrics::Predictions predictions;
  metrics::GoldReferences gold;
  int hits = 0;
  int localized = 0;
  for (const auto& s : samples) {
    if (s.answers.empty()) throw EvaluationError("sample " + s.question_id + " has no reference answers");
    gold[s.question_id] = s.answers;
    auto it = by_id.find(s.question_id);
    if (it == by_id.end()) continue;
    predictions[s.question_id] = tokenize(it->second->answer_top10.front());
    if (!s.gt_boxes.empty()) {
      ++localized;
      for (const auto& g : s.gt_boxes) {
        if (iou(it->second->bbox, g) >= kAccIouThreshold) {
          ++hits;
          break;
        }
      }
    }
  }
  for (const auto& r : records) {
    if (!gold.count(r.question_id)) predictions[r.question_id] = tokenize(r.answer_top10.front());
  }
  MetricReport out;
  out.scores = metrics::score_corpus(predictions, gold);
  if (localized > 0) out.acc_at_05 = static_cast<double>(hits) / localized;
  out.count = samples.size();
  return out;
}

// Scores ×100, rounded to two decimals.
inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j{{"bleu1", scaled(r.scores.at(metrics::Metric::kBleu1).value)},
                   {"bleu4", scaled(r.scores.at(metrics::Metric::kBleu4).value)},
                   {"rouge_l", scaled(r.scores.at(metrics::Metric::kRougeL).value)},
                   {"cider", scaled(r.scores.at(metrics::Metric::kCider).value)},
                   {"count", r.count}};
  j["acc_at_0.5"] = r.acc_at_05 ? nlohmann::json(scaled(*r.acc_at_05)) : nlohmann::json(nullptr);
  return j;
}

inline std::string fixed2(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

// Aligned text table, one row per named report.
inline void print_table(std::ostream& out, const std::vector<std::pair<std::string, nlohmann::json>>& rows) {
  const std::vector<std::pair<std::string, std::string>> cols{
      {"bleu1", "BLEU-1"}, {"bleu4", "BLEU-4"}, {"rouge_l", "ROUGE-L"}, {"cider", "CIDEr"}, {"acc_at_0.5", "Acc@0.5"}};
  std::size_t name_w = 4;
  for (const auto& [name, j] : rows) name_w = std::max(name_w, name.size());
  out << std::left << std::setw(static_cast<int>(name_w)) << "run";
  for (const auto& [key, title] : cols) out << "  " << std::right << std::setw(8) << title;
  out << "\n";
  for (const auto& [name, j] : rows) {
    out << std::left << std::setw(static_cast<int>(name_w)) << name;
    for (const auto& [key, title] : cols) {
      const std::string cell = j.contains(key) && j[key].is_number() ? fixed2(j[key].get<double>()) : "-";
      out << "  " << std::right << std::setw(8) << cell;
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

inline void check_device(const std::string& device) {
  if (device != "cpu") throw UsageError("unsupported device '" + device + "' (only cpu is available)");
}

struct TrainOptions {
  std::string data_dir;
  std::string out_dir;
  std::string config_path;
  std::vector<std::string> settings;  // key=value overrides, applied after the config file
  std::optional<std::string> task;
  std::optional<std::string> stage;
  std::string init_checkpoint;
  std::string vqg_checkpoint;
  bool no_vqg_reward = false;
  std::vector<std::string> ablations;
  std::optional<std::uint64_t> seed;
  std::string embeddings_path;
  std::string device = "cpu";
};

inline void apply_ablation(RunConfig& rc, const std::string& name) {
  if (name == "multi-object") apply_setting(rc, "multi_object_bce", "true");
  else if (name == "no-localization") apply_setting(rc, "use_localization", "false");
  else if (name == "target-embeddings") apply_setting(rc, "model.target_embeddings", "true");
  else if (name == "scst-switched") apply_setting(rc, "scst_switched", "true");
  else throw UsageError("unknown ablation '" + name +
                        "' (expected multi-object, no-localization, target-embeddings or scst-switched)");
}

inline RunConfig resolve_run_config(const TrainOptions& opt) {
  RunConfig rc;
  if (!opt.config_path.empty()) apply_config_file(rc, opt.config_path);
  for (const auto& s : opt.settings) apply_assignment(rc, s);
  if (opt.task) apply_setting(rc, "task", *opt.task);
  if (opt.stage) apply_setting(rc, "stage", *opt.stage);
  if (opt.no_vqg_reward) rc.train.vqg_reward = false;
  for (const auto& a : opt.ablations) apply_ablation(rc, a);
  if (opt.seed) rc.train.seed = *opt.seed;
  rc.train.validate();
  return rc;
}

struct TrainSummary {
  TrainResult result;
  std::string best_checkpoint;
  std::string last_checkpoint;
  std::string log_path;
};

// Runs one training stage. XE builds a fresh model from the run config; SCST
// continues from --init-checkpoint, whose model settings win.
inline TrainSummary cmd_train(const TrainOptions& opt, std::ostream& out) {
  check_device(opt.device);
  if (opt.data_dir.empty() || opt.out_dir.empty()) throw UsageError("train needs --data and --out");
  RunConfig rc = resolve_run_config(opt);
  TrainConfig& tc = rc.train;
  if (tc.stage == Stage::kScst) {
    if (opt.init_checkpoint.empty()) throw UsageError("--stage scst requires --init-checkpoint");
    if (tc.vqg_reward && opt.vqg_checkpoint.empty()) {
      throw UsageError("--stage scst with the VQG reward requires --vqg-checkpoint (or pass --no-vqg-reward)");
    }
  }
  const PreparedData prepared = load_prepared(opt.data_dir);
  const TrainingData& data = prepared.data;
  fs::create_directories(opt.out_dir);
  TrainSummary summary;
  summary.best_checkpoint = (fs::path(opt.out_dir) / "best.ckpt").string();
  summary.last_checkpoint = (fs::path(opt.out_dir) / "last.ckpt").string();
  summary.log_path = (fs::path(opt.out_dir) / "metrics.jsonl").string();
  write_json(fs::path(opt.out_dir) / "config.json",
             nlohmann::json{{"train", tc}, {"model", rc.model}, {"data", opt.data_dir}});
  RunOptions run;
  run.checkpoint_path = summary.best_checkpoint;
  run.log_path = summary.log_path;
  run.dump_path = (fs::path(opt.out_dir) / "nonfinite_dump.json").string();

  std::optional<Checkpoint> init;
  if (!opt.init_checkpoint.empty()) init = load_checkpoint(opt.init_checkpoint);
  ModelConfig mc = init ? init->config : rc.model;
  mc.vocab_size = data.vocab.size();
  mc.task = tc.task;
  mc.multi_object_bce = tc.multi_object_bce;
  mc.use_localization = tc.use_localization;
  if (init && !(mc == init->config)) {
    throw UsageError("--init-checkpoint was trained with a different model configuration");
  }
  std::optional<EmbeddingTable> emb;
  if (!opt.embeddings_path.empty()) {
    emb = load_pretrained_embeddings(opt.embeddings_path, data.vocab, mc.d_model, tc.seed);
  }
  QAModel<float> model(mc, tc.seed, emb ? &*emb : nullptr);

  std::optional<QAModel<float>> vqg;
  if (tc.stage == Stage::kScst && tc.vqg_reward) {
    const Checkpoint ck = load_checkpoint(opt.vqg_checkpoint);
    if (ck.config.task != Task::kVqg) throw UsageError("--vqg-checkpoint does not hold a question generator");
    vqg.emplace(model_from_checkpoint<float>(ck, data.vocab));
    vqg->parameters().set_frozen(true);
  }
  out << "training " << to_string(tc.task) << " " << to_string(tc.stage) << " for " << tc.max_iterations
      << " iterations (" << model.parameters().count() << " parameters)\n";
  if (tc.task == Task::kVqg) {
    summary.result = train_vqg(model, data, tc, run);
  } else {
    summary.result = train_stage(model, data, tc, init ? &*init : nullptr, vqg ? &*vqg : nullptr, run);
  }
  save_checkpoint(summary.last_checkpoint,
                  make_checkpoint(model, data.vocab,
                                  nlohmann::json{{"train_config", tc}, {"iteration", summary.result.iterations}}));
  if (summary.result.final_val) {
    out << "final validation CIDEr " << fixed2(100.0 * score_of(*summary.result.final_val, metrics::Metric::kCider))
        << ", best " << fixed2(100.0 * summary.result.best_val_cider) << " at iteration "
        << summary.result.best_iteration << "\n";
  }
  return summary;
}

struct EvalOptions {
  std::string data_dir;
  std::string split = "val";
  std::string checkpoint;
  std::string predictions;  // score this file instead of decoding
  std::string out;          // JSON report path
  std::string device = "cpu";
};

inline std::vector<PredictionRecord> predict_split(const Checkpoint& ck, const PreparedData& prepared,
                                                   const std::vector<QASample>& samples, int beam_width) {
  if (ck.vocab.hash() != prepared.data.vocab.hash()) {
    throw EvaluationError("checkpoint vocabulary does not match the dataset vocabulary; refusing to evaluate");
  }
  if (ck.config.task != Task::kVqa) throw UsageError("the checkpoint holds a question generator, not an answering model");
  const QAModel<float> model = model_from_checkpoint<float>(ck, prepared.data.vocab);
  std::vector<PredictionRecord> records;
  records.reserve(samples.size());
  for (const auto& s : samples) {
    const Example ex = make_example(s, prepared.data);
    records.push_back(predict_one(model, ex, prepared.data.vocab, beam_width));
  }
  return records;
}

inline MetricReport cmd_eval(const EvalOptions& opt, std::ostream& out) {
  check_device(opt.device);
  if (opt.checkpoint.empty() == opt.predictions.empty()) {
    throw UsageError("eval needs exactly one of --checkpoint or --predictions");
  }
  const PreparedData prepared = load_prepared(opt.data_dir);
  const auto& samples = split_samples(prepared, parse_split(opt.split));
  const std::vector<PredictionRecord> records = opt.predictions.empty()
                                                    ? predict_split(load_checkpoint(opt.checkpoint), prepared, samples, 0)
                                                    : load_predictions(opt.predictions);
  const MetricReport report = score_predictions(records, samples);
  nlohmann::json j = to_json(report);
  j["split"] = opt.split;
  if (!opt.out.empty()) write_json(opt.out, j);
  out << j.dump() << "\n";
  print_table(out, {{opt.split, j}});
  return report;
}

struct PredictOptions {
  std::string data_dir;
  std::string split = "test";
  std::string checkpoint;
  std::string out;
  int beam = 10;
  std::string device = "cpu";
};

inline std::vector<PredictionRecord> cmd_predict(const PredictOptions& opt, std::ostream& out) {
  check_device(opt.device);
  if (opt.beam < 1) throw UsageError("--beam must be >= 1");
  const PreparedData prepared = load_prepared(opt.data_dir);
  const auto& samples = split_samples(prepared, parse_split(opt.split));
  const auto records = predict_split(load_checkpoint(opt.checkpoint), prepared, samples, opt.beam);
  save_predictions(opt.out, records);
  out << "wrote " << records.size() << " predictions to " << opt.out << "\n";
  return records;
}

// Summarizes eval reports (as a table) and training logs (best validation
// CIDEr and last logged losses).
inline void cmd_report(const std::vector<std::string>& reports, const std::vector<std::string>& logs,
                       std::ostream& out) {
  if (reports.empty() && logs.empty()) throw UsageError("report needs at least one --eval or --log file");
  if (!reports.empty()) {
    std::vector<std::pair<std::string, nlohmann::json>> rows;
    for (const auto& path : reports) rows.emplace_back(fs::path(path).stem().string(), read_json(path));
    print_table(out, rows);
  }
  for (const auto& path : logs) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);
    std::string line;
    double best = -1.0;
    long best_it = -1;
    long iterations = 0;
    nlohmann::json last_step;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const nlohmann::json rec = nlohmann::json::parse(line);
      if (rec.contains("val")) {
        const double c = rec["val"]["cider"].get<double>();
        if (c > best) {
          best = c;
          best_it = rec["iteration"].get<long>();
        }
      } else {
        last_step = rec;
        iterations = rec["iteration"].get<long>() + 1;
      }
    }
    out << path << ": " << iterations << " iterations";
    if (best_it >= 0) out << ", best validation CIDEr " << fixed2(100.0 * best) << " at iteration " << best_it;
    out << "\n";
    if (!last_step.is_null()) out << "  last step " << last_step.dump() << "\n";
  }
}

}  // namespace sceneqa::cli
