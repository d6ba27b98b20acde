// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0

// Slow, direct reimplementations used to cross-check the library. They share
// no code with it beyond the TokenList and Box3 types.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sceneqa/corpus/types.hpp"
#include "sceneqa/geometry/box.hpp"

namespace sceneqa::oracle {

using Gram = std::vector<std::string>;
using GramCounts = std::map<Gram, int>;

inline GramCounts grams(const TokenList& s, std::size_t n) {
  GramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[Gram(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + n))];
  return out;
}

// CIDEr-D written out term by term: tf-idf vectors per order with
// log(max(1, df)) document frequencies over the reference sets, clipped
// candidate weights, Gaussian length penalty (sigma 6), times 10.
inline std::vector<double> cider_d(const std::vector<TokenList>& cands, const std::vector<std::vector<TokenList>>& refs) {
  const double n_docs = static_cast<double>(refs.size());
  std::map<Gram, double> df;
  for (const auto& set : refs) {
    std::set<Gram> seen;
    for (const auto& r : set) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& [g, c] : grams(r, n)) seen.insert(g);
      }
    }
    for (const auto& g : seen) df[g] += 1.0;
  }
  auto weight = [&](const Gram& g, int tf) {
    const double d = df.count(g) ? df.at(g) : 0.0;
    return tf * (std::log(n_docs) - std::log(std::max(1.0, d)));
  };
  std::vector<double> out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const TokenList& c = cands[i];
    double sum_refs = 0.0;
    for (const auto& r : refs[i]) {
      double per_order_sum = 0.0;
      for (std::size_t n = 1; n <= 4; ++n) {
        const GramCounts gc = grams(c, n);
        const GramCounts gr = grams(r, n);
        double nc = 0.0, nr = 0.0, dot = 0.0;
        for (const auto& [g, tf] : gc) nc += std::pow(weight(g, tf), 2);
        for (const auto& [g, tf] : gr) nr += std::pow(weight(g, tf), 2);
        for (const auto& [g, tf] : gc) {
          if (!gr.count(g)) continue;
          const double wc = weight(g, tf);
          const double wr = weight(g, gr.at(g));
          dot += std::min(wc, wr) * wr;
        }
        double v = dot;
        if (nc > 0.0 && nr > 0.0) v /= std::sqrt(nc) * std::sqrt(nr);
        const double delta = static_cast<double>(c.size()) - static_cast<double>(r.size());
        per_order_sum += v * std::exp(-delta * delta / 72.0);
      }
      sum_refs += per_order_sum / 4.0;
    }
    out.push_back(c.empty() ? 0.0 : 10.0 * sum_refs / static_cast<double>(refs[i].size()));
  }
  return out;
}

// Corpus BLEU with clipped counts, closest reference length (shorter on
// ties) and the same 1e-15 / 1e-9 floors as the coco-caption scorer.
inline double bleu(const std::vector<TokenList>& cands, const std::vector<std::vector<TokenList>>& refs, int max_n) {
  std::vector<double> correct(static_cast<std::size_t>(max_n), 0.0), guess(static_cast<std::size_t>(max_n), 0.0);
  double c_len = 0.0, r_len = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const TokenList& c = cands[i];
    c_len += static_cast<double>(c.size());
    std::vector<std::size_t> lens;
    for (const auto& r : refs[i]) lens.push_back(r.size());
    std::sort(lens.begin(), lens.end());
    std::size_t best = lens.front();
    for (std::size_t l : lens) {
      const auto d = [&](std::size_t x) { return x > c.size() ? x - c.size() : c.size() - x; };
      if (d(l) < d(best)) best = l;
    }
    r_len += static_cast<double>(best);
    for (int n = 1; n <= max_n; ++n) {
      const GramCounts gc = grams(c, static_cast<std::size_t>(n));
      for (const auto& [g, cnt] : gc) {
        int clip = 0;
        for (const auto& r : refs[i]) {
          const GramCounts gr = grams(r, static_cast<std::size_t>(n));
          if (gr.count(g)) clip = std::max(clip, gr.at(g));
        }
        correct[static_cast<std::size_t>(n - 1)] += std::min(cnt, clip);
      }
      guess[static_cast<std::size_t>(n - 1)] += c.size() >= static_cast<std::size_t>(n) ? static_cast<double>(c.size() - n + 1) : 0.0;
    }
  }
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) log_sum += std::log((correct[static_cast<std::size_t>(n)] + 1e-15) / (guess[static_cast<std::size_t>(n)] + 1e-9));
  double score = std::exp(log_sum / max_n);
  const double ratio = (c_len + 1e-15) / (r_len + 1e-9);
  if (ratio < 1.0) score *= std::exp(1.0 - 1.0 / ratio);
  return score;
}

// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs_bruteforce(const TokenList& a, const TokenList& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::size_t len = 0;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

inline double rouge_l(const TokenList& c, const std::vector<TokenList>& refs) {
  double p = 0.0, r = 0.0;
  for (const auto& ref : refs) {
    const double l = static_cast<double>(lcs_bruteforce(c, ref));
    p = std::max(p, l / static_cast<double>(c.size()));
    r = std::max(r, l / static_cast<double>(ref.size()));
  }
  if (p == 0.0 || r == 0.0) return 0.0;
  const double b2 = 1.2 * 1.2;
  return (1 + b2) * p * r / (r + b2 * p);
}

// Intersection volume by splitting space at every box face and summing the
// cells whose midpoint lies in both boxes.
inline double iou(const Box3& a, const Box3& b) {
  double inter = 0.0;
  std::array<std::vector<double>, 3> cuts;
  for (int d = 0; d < 3; ++d) {
    cuts[d] = {a.min()(d), a.max()(d), b.min()(d), b.max()(d)};
    std::sort(cuts[d].begin(), cuts[d].end());
  }
  auto inside = [](const Box3& box, const Eigen::Vector3d& p) {
    return (p.array() > box.min().array()).all() && (p.array() < box.max().array()).all();
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d lo(cuts[0][i], cuts[1][j], cuts[2][k]);
        const Eigen::Vector3d hi(cuts[0][i + 1], cuts[1][j + 1], cuts[2][k + 1]);
        if (inside(a, 0.5 * (lo + hi)) && inside(b, 0.5 * (lo + hi))) inter += (hi - lo).prod();
      }
    }
  }
  const double va = a.extent.prod();
  const double vb = b.extent.prod();
  return inter / (va + vb - inter);
}

// Every sequence of at most max_len tokens that either ends with end_id or
// has exactly max_len tokens, scored by a step-indexed log-prob table
// (table[t][token]). Sorted best first, ties broken by token sequence.
struct Enumerated {
  std::vector<int> tokens;  // without end_id
  double score = 0.0;
};

inline std::vector<Enumerated> enumerate_sequences(const std::vector<std::vector<double>>& table, int end_id,
                                                   int max_len) {
  std::vector<Enumerated> out;
  const int v = static_cast<int>(table.front().size());
  std::function<void(std::vector<int>&, double)> rec = [&](std::vector<int>& prefix, double s) {
    const int t = static_cast<int>(prefix.size());
    for (int tok = 0; tok < v; ++tok) {
      const double ns = s + table[static_cast<std::size_t>(t)][static_cast<std::size_t>(tok)];
      if (tok == end_id) {
        out.push_back({prefix, ns});
      } else if (t + 1 == max_len) {
        std::vector<int> full = prefix;
        full.push_back(tok);
        out.push_back({full, ns});
      } else {
        prefix.push_back(tok);
        rec(prefix, ns);
        prefix.pop_back();
      }
    }
  };
  std::vector<int> start;
  rec(start, 0.0);
  std::stable_sort(out.begin(), out.end(), [](const Enumerated& a, const Enumerated& b) { return a.score > b.score; });
  return out;
}

}  // namespace sceneqa::oracle
