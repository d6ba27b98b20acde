// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0
//
// sceneqa: prepare data, train, evaluate and export predictions.

#include <iostream>

#include <CLI11.hpp>

#include "sceneqa/cli/commands.hpp"

using namespace sceneqa;
using namespace sceneqa::cli;

int main(int argc, char** argv) {
  CLI::App app{"3D scene question answering: data preparation, training, evaluation and prediction export"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string device = "cpu";
  app.add_option("--device", device, "compute device (cpu)")->capture_default_str();
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed = s, seed_given = true; }, "random seed")
      ->default_str("1");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "write a prepared data directory");
  std::string out_dir;
  SyntheticPrepareOptions syn;
  ScanQaPrepareOptions scan;
  std::string answer_style = "short";
  prepare->add_option("--out", out_dir, "output directory (created if missing)")->required();
  auto* synthetic_flag = prepare->add_flag("--synthetic", "generate a synthetic corpus");
  auto* scanqa_opt = prepare->add_option("--from-scanqa", scan.train_path, "ScanQA-style train JSON");
  synthetic_flag->excludes(scanqa_opt);
  prepare->add_option("--scanqa-val", scan.val_path, "ScanQA-style val JSON")->needs(scanqa_opt);
  prepare->add_option("--scanqa-test", scan.test_path, "ScanQA-style test JSON")->needs(scanqa_opt);
  prepare->add_option("--proposals", scan.proposals_dir, "directory of per-scene proposal files")->needs(scanqa_opt);
  prepare->add_option("--scenes", syn.generator.num_scenes, "synthetic scenes")->capture_default_str();
  prepare->add_option("--questions-per-scene", syn.generator.questions_per_scene)->capture_default_str();
  prepare->add_option("--min-objects", syn.generator.min_objects)->capture_default_str();
  prepare->add_option("--max-objects", syn.generator.max_objects)->capture_default_str();
  prepare->add_option("--val-scenes", syn.val_scenes, "synthetic scenes held out for val/test (default: a quarter)");
  prepare->add_option("--answer-style", answer_style, "short or sentence")
      ->check(CLI::IsMember({"short", "sentence"}))
      ->capture_default_str();
  prepare->add_flag("--paraphrases", syn.generator.paraphrases, "add alternative answer phrasings");
  prepare->add_option("--min-count", syn.min_count, "minimum token count for the vocabulary")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "run one training stage");
  TrainOptions topt;
  std::string task, stage;
  train->add_option("--data", topt.data_dir, "prepared data directory")->required();
  train->add_option("--out", topt.out_dir, "run directory for checkpoints and logs")->required();
  train->add_option("--config", topt.config_path, "run config file (key = value lines)");
  train->add_option("--set", topt.settings, "config override key=value (repeatable)");
  train->add_option("--task", task, "vqa or vqg")->check(CLI::IsMember({"vqa", "vqg"}));
  train->add_option("--stage", stage, "xe or scst")->check(CLI::IsMember({"xe", "scst"}));
  train->add_option("--init-checkpoint", topt.init_checkpoint, "XE checkpoint to continue from (scst)");
  train->add_option("--vqg-checkpoint", topt.vqg_checkpoint, "frozen question generator (scst)");
  train->add_flag("--no-vqg-reward", topt.no_vqg_reward, "drop the question-reconstruction reward");
  train->add_option("--ablation", topt.ablations,
                    "multi-object | no-localization | target-embeddings | scst-switched (repeatable)");
  train->add_option("--embeddings", topt.embeddings_path, "pretrained word vectors (GloVe text layout)");

  // eval
  auto* eval = app.add_subcommand("eval", "score greedy answers and localization");
  EvalOptions eopt;
  eval->add_option("--data", eopt.data_dir, "prepared data directory")->required();
  eval->add_option("--split", eopt.split, "train, val or test")->capture_default_str();
  auto* eval_ck = eval->add_option("--checkpoint", eopt.checkpoint, "answering model checkpoint");
  auto* eval_pred = eval->add_option("--predictions", eopt.predictions, "score a prediction file instead");
  eval_ck->excludes(eval_pred);
  eval->add_option("--out", eopt.out, "write the JSON report here");

  // predict
  auto* predict = app.add_subcommand("predict", "export ranked answers and boxes");
  PredictOptions popt;
  predict->add_option("--data", popt.data_dir, "prepared data directory")->required();
  predict->add_option("--split", popt.split, "train, val or test")->capture_default_str();
  predict->add_option("--checkpoint", popt.checkpoint, "answering model checkpoint")->required();
  predict->add_option("--out", popt.out, "prediction JSON path")->required();
  predict->add_option("--beam", popt.beam, "beam width for answer_top10")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "tabulate eval reports and summarize training logs");
  std::vector<std::string> reports, logs;
  report->add_option("--eval", reports, "eval report JSON (repeatable)");
  report->add_option("--log", logs, "training metrics.jsonl (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    check_device(device);
    if (prepare->parsed()) {
      CorpusStats stats;
      if (!scan.train_path.empty()) {
        if (scan.val_path.empty() || scan.proposals_dir.empty()) {
          throw UsageError("--from-scanqa needs --scanqa-val and --proposals");
        }
        stats = prepare_scanqa(out_dir, scan);
      } else if (*synthetic_flag) {
        syn.seed = seed;
        syn.generator.answer_style = answer_style == "sentence" ? AnswerStyle::kSentence : AnswerStyle::kShort;
        stats = prepare_synthetic(out_dir, syn);
      } else {
        throw UsageError("prepare needs --synthetic or --from-scanqa");
      }
      print_stats(std::cout, stats);
    } else if (train->parsed()) {
      if (!task.empty()) topt.task = task;
      if (!stage.empty()) topt.stage = stage;
      if (seed_given) topt.seed = seed;
      topt.device = device;
      cmd_train(topt, std::cout);
    } else if (eval->parsed()) {
      eopt.device = device;
      cmd_eval(eopt, std::cout);
    } else if (predict->parsed()) {
      popt.device = device;
      cmd_predict(popt, std::cout);
    } else if (report->parsed()) {
      cmd_report(reports, logs, std::cout);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
