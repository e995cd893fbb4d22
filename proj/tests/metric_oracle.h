// Copyright 2026 The SCST Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force reference implementations of CIDEr-D, BLEU-4 and ROUGE-L.
//
// Deliberately written differently from src/metrics: n-grams are space-joined
// strings, document frequencies are recounted by scanning the whole corpus
// for each query, and the LCS is found by enumerating every subsequence of
// the candidate. Only usable on tiny corpora.

#ifndef SCST_TESTS_METRIC_ORACLE_H_
#define SCST_TESTS_METRIC_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace scst::oracle {

using Words = std::vector<int>;
using Refs = std::vector<Words>;

inline std::string join(const Words& w, std::size_t from, std::size_t n) {
  std::string s;
  for (std::size_t i = from; i < from + n; ++i) s += std::to_string(w[i]) + " ";
  return s;
}

inline std::map<std::string, int> grams(const Words& w, std::size_t n) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i + n <= w.size(); ++i) m[join(w, i, n)]++;
  return m;
}

inline bool image_contains(const Refs& refs, const std::string& g, std::size_t n) {
  for (const Words& r : refs) {
    if (grams(r, n).count(g)) return true;
  }
  return false;
}

inline double cider_d(const Words& cand, const Refs& refs, const std::vector<Refs>& corpus,
                      double sigma = 6.0) {
  const double log_n = std::log(static_cast<double>(corpus.size()));
  auto weight = [&](const std::string& g, std::size_t n, int tf) {
    int df = 0;
    for (const Refs& img : corpus) df += image_contains(img, g, n) ? 1 : 0;
    return tf * (log_n - std::log(std::max(1.0, static_cast<double>(df))));
  };
  double total = 0.0;
  for (const Words& ref : refs) {
    double per_ref = 0.0;
    const double delta = static_cast<double>(cand.size()) - static_cast<double>(ref.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      auto gc = grams(cand, n);
      auto gr = grams(ref, n);
      double dotp = 0.0, nc = 0.0, nr = 0.0;
      for (auto& [g, tf] : gc) nc += std::pow(weight(g, n, tf), 2);
      for (auto& [g, tf] : gr) nr += std::pow(weight(g, n, tf), 2);
      for (auto& [g, tf] : gc) {
        if (!gr.count(g)) continue;
        const double wc = weight(g, n, tf);
        const double wr = weight(g, n, gr[g]);
        dotp += std::min(wc, wr) * wr;
      }
      double val = dotp;
      if (nc > 0 && nr > 0) val /= std::sqrt(nc) * std::sqrt(nr);
      per_ref += val * std::exp(-delta * delta / (2 * sigma * sigma));
    }
    total += per_ref / 4.0;
  }
  return 10.0 * total / static_cast<double>(refs.size());
}

struct BleuParts {
  double guess[4] = {0, 0, 0, 0};
  double correct[4] = {0, 0, 0, 0};
  double c = 0, r = 0;
};

inline BleuParts bleu_parts(const Words& cand, const Refs& refs) {
  BleuParts p;
  p.c = static_cast<double>(cand.size());
  // Closest reference length, preferring the shorter one on ties.
  std::vector<std::pair<long, long>> order;
  for (const Words& r : refs) {
    const long d = std::labs(static_cast<long>(r.size()) - static_cast<long>(cand.size()));
    order.push_back({d, static_cast<long>(r.size())});
  }
  std::sort(order.begin(), order.end());
  p.r = static_cast<double>(order.front().second);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (auto& [g, tf] : grams(cand, n)) {
      int best = 0;
      for (const Words& r : refs) {
        auto gr = grams(r, n);
        if (gr.count(g)) best = std::max(best, gr[g]);
      }
      p.guess[n - 1] += tf;
      p.correct[n - 1] += std::min(tf, best);
    }
  }
  return p;
}

inline double bp(double c, double r) { return c <= 0 ? 0.0 : (c >= r ? 1.0 : std::exp(1 - r / c)); }

inline double bleu_sentence(const Words& cand, const Refs& refs) {
  if (cand.empty()) return 0.0;
  BleuParts p = bleu_parts(cand, refs);
  double prod = 1.0;
  for (int n = 0; n < 4; ++n) {
    const double num = p.correct[n] > 0 ? p.correct[n] : 1e-9;
    const double den = p.guess[n] > 0 ? p.guess[n] : 1.0;
    prod *= num / den;
  }
  return bp(p.c, p.r) * std::pow(prod, 0.25);
}

inline double bleu_corpus(const std::vector<Words>& cands, const std::vector<Refs>& refs) {
  BleuParts total;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    BleuParts p = bleu_parts(cands[i], refs[i]);
    for (int n = 0; n < 4; ++n) {
      total.guess[n] += p.guess[n];
      total.correct[n] += p.correct[n];
    }
    total.c += p.c;
    total.r += p.r;
  }
  double prod = 1.0;
  for (int n = 0; n < 4; ++n) {
    if (total.correct[n] == 0) return 0.0;
    prod *= total.correct[n] / total.guess[n];
  }
  return bp(total.c, total.r) * std::pow(prod, 0.25);
}

inline bool is_subsequence(const Words& sub, const Words& seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i) {
    if (seq[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

inline std::size_t lcs_brute(const Words& a, const Words& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Words sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline double rouge_l(const Words& cand, const Refs& refs, double beta = 1.2) {
  if (cand.empty()) return 0.0;
  double best = 0.0;
  for (const Words& r : refs) {
    const double l = static_cast<double>(lcs_brute(cand, r));
    if (l == 0) continue;
    const double p = l / cand.size(), rec = l / r.size();
    best = std::max(best, (1 + beta * beta) * p * rec / (rec + beta * beta * p));
  }
  return best;
}

}  // namespace scst::oracle

#endif  // SCST_TESTS_METRIC_ORACLE_H_
