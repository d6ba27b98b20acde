// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sceneqa/geometry/box.hpp"
#include "sceneqa/metrics/corpus.hpp"

namespace sceneqa {
namespace {

using namespace sceneqa::metrics;

struct TinyCorpus {
  std::vector<TokenList> cands;
  std::vector<std::vector<TokenList>> refs;
};

TokenList random_sentence(std::mt19937_64& rng, int vocab, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  TokenList s(static_cast<std::size_t>(len(rng)));
  for (auto& t : s) t = "w" + std::to_string(word(rng));
  return s;
}

TinyCorpus random_corpus(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> items(1, 6);
  std::uniform_int_distribution<int> nrefs(1, 4);
  std::uniform_int_distribution<int> vocab(2, 10);
  const int v = vocab(rng);
  TinyCorpus c;
  const int n = items(rng);
  for (int i = 0; i < n; ++i) {
    c.cands.push_back(random_sentence(rng, v, 1, 8));
    std::vector<TokenList> refs;
    const int r = nrefs(rng);
    for (int j = 0; j < r; ++j) refs.push_back(random_sentence(rng, v, 1, 8));
    c.refs.push_back(refs);
  }
  return c;
}

TEST(Cider, MatchesOracleOnRandomCorpora) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const TinyCorpus c = random_corpus(rng);
    const NGramStats stats = build_idf(c.refs);
    const std::vector<double> expect = oracle::cider_d(c.cands, c.refs);
    for (std::size_t i = 0; i < c.cands.size(); ++i) {
      EXPECT_NEAR(cider_value(c.cands[i], c.refs[i], stats), expect[i], 1e-6) << "trial " << trial;
    }
  }
}

TEST(Bleu, MatchesOracleOnRandomCorpora) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const TinyCorpus c = random_corpus(rng);
    EXPECT_NEAR(bleu(c.cands, c.refs, 1).value, oracle::bleu(c.cands, c.refs, 1), 1e-6);
    EXPECT_NEAR(bleu(c.cands, c.refs, 4).value, oracle::bleu(c.cands, c.refs, 4), 1e-6);
  }
}

TEST(RougeL, MatchesOracleOnRandomCorpora) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const TinyCorpus c = random_corpus(rng);
    for (std::size_t i = 0; i < c.cands.size(); ++i) {
      EXPECT_NEAR(rouge_l_value(c.cands[i], c.refs[i]), oracle::rouge_l(c.cands[i], c.refs[i]), 1e-6);
    }
  }
}

TEST(RougeL, LcsMatchesEnumeration) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const TokenList a = random_sentence(rng, 4, 0, 8);
    const TokenList b = random_sentence(rng, 4, 0, 8);
    EXPECT_EQ(lcs_length(a, b), oracle::lcs_bruteforce(a, b));
  }
}

TEST(Cider, KnownValues) {
  // A single item: every n-gram has df = 1 = N, so all weights vanish.
  const std::vector<std::vector<TokenList>> one{{{"a", "b"}}};
  EXPECT_DOUBLE_EQ(cider_value({"a", "b"}, one[0], build_idf(one)), 0.0);
  // Two items sharing nothing: an exact 4+ token match scores the maximum 10.
  const std::vector<std::vector<TokenList>> two{{{"the", "chair", "is", "red"}}, {{"x"}}};
  EXPECT_NEAR(cider_value({"the", "chair", "is", "red"}, two[0], build_idf(two)), 10.0, 1e-12);
  // A single-token exact match only gets the unigram quarter.
  EXPECT_NEAR(cider_value({"x"}, two[1], build_idf(two)), 2.5, 1e-12);
  EXPECT_DOUBLE_EQ(cider_value({}, two[1], build_idf(two)), 0.0);
}

TEST(Cider, ScoresStayWithinRange) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const TinyCorpus c = random_corpus(rng);
    const NGramStats stats = build_idf(c.refs);
    for (std::size_t i = 0; i < c.cands.size(); ++i) {
      const double v = cider_value(c.cands[i], c.refs[i], stats);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 10.0 + 1e-9);
    }
  }
}

TEST(Bleu, PerfectMatchIsOne) {
  const std::vector<TokenList> c{{"a", "b", "c", "d"}, {"e", "f", "g", "h", "i"}};
  const std::vector<std::vector<TokenList>> r{{c[0]}, {c[1], {"z"}}};
  EXPECT_NEAR(bleu(c, r, 1).value, 1.0, 1e-9);
  EXPECT_NEAR(bleu(c, r, 4).value, 1.0, 1e-9);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  // Candidate of length 2 against references of lengths 3 and 5: r = 3.
  const std::vector<TokenList> c{{"a", "b"}};
  const std::vector<std::vector<TokenList>> r{{{"a", "b", "c"}, {"a", "b", "c", "d", "e"}}};
  EXPECT_NEAR(bleu(c, r, 1).value, std::exp(1.0 - 3.0 / 2.0), 1e-9);
}

TEST(Corpus, MismatchedIdsAreReported) {
  const Predictions p{{"q1", {"a"}}, {"q3", {"b"}}};
  const GoldReferences g{{"q1", {{"a"}}}, {"q2", {{"b"}}}};
  try {
    score_corpus(p, g);
    FAIL();
  } catch (const EvaluationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("q2"), std::string::npos);
    EXPECT_NE(msg.find("q3"), std::string::npos);
  }
  EXPECT_THROW(score_corpus({}, {}), EvaluationError);
}

TEST(Corpus, OraclePredictionsScorePerfectly) {
  const GoldReferences g{{"q1", {{"the", "red", "chair", "here"}}}, {"q2", {{"two", "tables", "by", "door"}}}};
  Predictions p;
  for (const auto& [id, refs] : g) p[id] = refs[0];
  const Report r = score_corpus(p, g);
  EXPECT_NEAR(r.at(Metric::kBleu1).value, 1.0, 1e-9);
  EXPECT_NEAR(r.at(Metric::kBleu4).value, 1.0, 1e-9);
  EXPECT_NEAR(r.at(Metric::kRougeL).value, 1.0, 1e-12);
  EXPECT_NEAR(r.at(Metric::kCider).value, 10.0, 1e-9);
}

TEST(Geometry, IouMatchesCellDecomposition) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> ext(0.1, 1.5);
  for (int trial = 0; trial < 500; ++trial) {
    const Box3 a{{pos(rng), pos(rng), pos(rng)}, {ext(rng), ext(rng), ext(rng)}};
    const Box3 b{{pos(rng), pos(rng), pos(rng)}, {ext(rng), ext(rng), ext(rng)}};
    EXPECT_NEAR(iou(a, b), oracle::iou(a, b), 1e-9);
  }
}

TEST(Geometry, IouEndpoints) {
  const Box3 a{{0, 0, 0}, {1, 2, 3}};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box3{{5, 0, 0}, {1, 1, 1}}), 0.0);
  // Half-overlap along x of two unit cubes: 0.5 / 1.5.
  EXPECT_NEAR(iou(Box3{{0, 0, 0}, {1, 1, 1}}, Box3{{0.5, 0, 0}, {1, 1, 1}}), 1.0 / 3.0, 1e-12);
}

TEST(Geometry, CornersRoundTrip) {
  const Box3 a{{0.3, -1.2, 2.0}, {0.4, 1.1, 2.5}};
  const auto corners = to_corners(a);
  const Box3 b = from_corners(corners);
  EXPECT_LT((a.center - b.center).norm(), 1e-12);
  EXPECT_LT((a.extent - b.extent).norm(), 1e-12);
  EXPECT_EQ(corners[0], a.min());
  EXPECT_EQ(corners[7], a.max());
}

}  // namespace
}  // namespace sceneqa
