// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Trains a small answering model on synthetic rooms and prints a few answers
// with their predicted target boxes.
//
//   quickstart [iterations]

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "sceneqa/corpus/synthetic.hpp"
#include "sceneqa/corpus/vocabulary.hpp"
#include "sceneqa/train/trainer.hpp"

using namespace sceneqa;

int main(int argc, char** argv) {
  const long iterations = argc > 1 ? std::atol(argv[1]) : 400;

  SyntheticConfig gen;
  gen.num_scenes = 6;
  gen.questions_per_scene = 4;
  gen.answer_style = AnswerStyle::kSentence;
  SyntheticDataset ds = generate_synthetic_dataset(gen, 42);

  TrainingData data;
  data.train = ds.samples;
  data.val = ds.samples;
  data.vocab = build_vocabulary(data.train);
  for (auto& p : ds.proposals) data.proposals[p.scene_id] = p;

  ModelConfig mc;
  mc.d_model = 96;
  mc.heads = 6;
  mc.ffn_dim = 384;
  mc.loc_hidden = 64;
  mc.vocab_size = data.vocab.size();
  QAModel<float> model(mc, 1);

  TrainConfig tc;
  tc.batch_size = 16;
  tc.max_iterations = iterations;
  tc.val_every = 100;
  tc.log_every = 0;
  tc.augment = false;
  std::cout << data.train.size() << " questions over " << ds.scenes.size() << " rooms, "
            << model.parameters().count() << " parameters\n";
  const TrainResult r = Trainer<float>(model, data, tc).run();
  for (const auto& rec : r.log) {
    if (!rec.contains("val")) continue;
    std::cout << "iteration " << std::setw(4) << rec["iteration"].get<long>() << "  CIDEr " << std::fixed
              << std::setprecision(2) << 100.0 * rec["val"]["cider"].get<double>() << "  Acc@0.5 "
              << 100.0 * rec["val"]["acc_at_0.5"].get<double>() << "\n";
  }

  const auto examples = make_examples(data.val, data);
  for (std::size_t i = 0; i < examples.size() && i < 6; ++i) {
    const Example& ex = examples[i];
    const Inference inf = infer(model, ex);
    const Box3 box = ex.proposals->box(inf.target_index);
    std::cout << "\nQ: " << join(ex.sample->question) << "\nA: " << join(data.vocab.decode(inf.greedy.tokens))
              << "   (reference: " << join(ex.references.front()) << ")\n   box center " << std::setprecision(2)
              << box.center.transpose() << ", IoU with target " << iou(box, ex.sample->gt_boxes.front()) << "\n";
  }
  return 0;
}
