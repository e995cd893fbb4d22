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

#include "scst/metrics.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "scst/error.h"

namespace scst {

namespace {

constexpr int kMaxOrder = 4;

int key_order(NGramKey key) { return static_cast<int>(key >> 60); }

References prepare_refs(const References& refs, bool include_eos) {
  if (include_eos) return refs;
  References out;
  out.reserve(refs.size());
  for (const Sentence& r : refs) out.push_back(strip_eos(r));
  return out;
}

struct CiderVector {
  std::array<std::map<NGramKey, double>, kMaxOrder> weights;
  std::array<double, kMaxOrder> norm{};
  std::size_t length = 0;
};

CiderVector cider_vector(std::span<const TokenId> s, const NGramStats& stats) {
  CiderVector v;
  const double log_n = stats.log_corpus_size();
  for (const auto& [key, tf] : ngram_counts(s)) {
    const int n = key_order(key) - 1;
    const double df = std::max(1.0, stats.document_frequency(key));
    const double w = static_cast<double>(tf) * (log_n - std::log(df));
    v.weights[n][key] = w;
    v.norm[n] += w * w;
  }
  for (double& x : v.norm) x = std::sqrt(x);
  v.length = s.size();
  return v;
}

std::array<double, kMaxOrder> cider_similarity(const CiderVector& cand, const CiderVector& ref,
                                               double sigma) {
  std::array<double, kMaxOrder> val{};
  const double delta = static_cast<double>(cand.length) - static_cast<double>(ref.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
  for (int n = 0; n < kMaxOrder; ++n) {
    for (const auto& [key, wc] : cand.weights[n]) {
      auto it = ref.weights[n].find(key);
      if (it == ref.weights[n].end()) continue;
      // Clipping in tf-idf space is count clipping: both sides share the idf.
      val[n] += std::min(wc, it->second) * it->second;
    }
    if (cand.norm[n] != 0.0 && ref.norm[n] != 0.0) val[n] /= cand.norm[n] * ref.norm[n];
    val[n] *= penalty;
  }
  return val;
}

struct BleuCounts {
  std::array<double, kMaxOrder> guess{};
  std::array<double, kMaxOrder> correct{};
  double cand_len = 0.0;
  double ref_len = 0.0;
};

BleuCounts bleu_counts(std::span<const TokenId> cand, const References& refs) {
  BleuCounts b;
  b.cand_len = static_cast<double>(cand.size());
  std::map<NGramKey, int> max_ref;
  std::size_t best_len = 0;
  std::size_t best_diff = std::numeric_limits<std::size_t>::max();
  for (const Sentence& r : refs) {
    for (const auto& [key, c] : ngram_counts(r)) {
      int& m = max_ref[key];
      m = std::max(m, c);
    }
    const std::size_t diff = r.size() > cand.size() ? r.size() - cand.size() : cand.size() - r.size();
    // Closest reference length; ties go to the shorter reference.
    if (diff < best_diff || (diff == best_diff && r.size() < best_len)) {
      best_diff = diff;
      best_len = r.size();
    }
  }
  b.ref_len = static_cast<double>(best_len);
  for (const auto& [key, c] : ngram_counts(cand)) {
    const int n = key_order(key) - 1;
    b.guess[n] += c;
    auto it = max_ref.find(key);
    if (it != max_ref.end()) b.correct[n] += std::min(c, it->second);
  }
  return b;
}

double brevity_penalty(double cand_len, double ref_len) {
  if (cand_len <= 0.0) return 0.0;
  if (cand_len >= ref_len) return 1.0;
  return std::exp(1.0 - ref_len / cand_len);
}

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void require_refs(const References& refs, const char* what) {
  if (refs.empty()) throw UsageError(std::string(what) + ": empty reference set");
}

void require_parallel(std::size_t candidates, std::size_t references) {
  if (candidates != references) {
    throw UsageError("metric: " + std::to_string(candidates) + " candidates but " +
                     std::to_string(references) + " reference sets");
  }
}

}  // namespace

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kCiderD: return "cider_d";
    case MetricKind::kBleu4: return "bleu4";
    case MetricKind::kRougeL: return "rouge_l";
  }
  return "unknown";
}

MetricKind parse_metric(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "cider" || s == "ciderd") return MetricKind::kCiderD;
  if (s == "bleu" || s == "bleu4") return MetricKind::kBleu4;
  if (s == "rouge" || s == "rougel") return MetricKind::kRougeL;
  throw UsageError("unknown metric kind: " + name);
}

Sentence tokenize_for_reward(std::span<const TokenId> sequence, bool include_eos) {
  Sentence out;
  for (TokenId w : sequence) {
    if (w == kEos) {
      if (include_eos) out.push_back(kEos);
      break;
    }
    out.push_back(w);
  }
  return out;
}

Sentence strip_eos(std::span<const TokenId> sentence) {
  Sentence out;
  for (TokenId w : sentence) {
    if (w != kEos) out.push_back(w);
  }
  return out;
}

NGramKey ngram_key(std::span<const TokenId> words) {
  if (words.empty() || words.size() > kMaxOrder) throw UsageError("n-gram order must be 1..4");
  NGramKey key = static_cast<NGramKey>(words.size()) << 60;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] < 0 || words[i] >= (1 << 15)) throw InputError("token id too large for n-gram key");
    key |= static_cast<NGramKey>(words[i]) << (15 * (3 - i));
  }
  return key;
}

std::map<NGramKey, int> ngram_counts(std::span<const TokenId> s) {
  std::map<NGramKey, int> counts;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[ngram_key(s.subspan(i, n))];
  }
  return counts;
}

NGramStats NGramStats::build(const std::vector<References>& corpus, bool include_eos) {
  NGramStats stats;
  stats.include_eos_ = include_eos;
  stats.corpus_size_ = corpus.size();
  for (const References& refs : corpus) {
    std::map<NGramKey, int> seen;
    for (const Sentence& r : prepare_refs(refs, include_eos)) {
      for (const auto& [key, c] : ngram_counts(r)) seen[key] = 1;
    }
    for (const auto& [key, one] : seen) stats.df_[key] += one;
  }
  return stats;
}

double NGramStats::document_frequency(NGramKey key) const {
  auto it = df_.find(key);
  return it == df_.end() ? 0.0 : static_cast<double>(it->second);
}

double NGramStats::log_corpus_size() const {
  return corpus_size_ == 0 ? 0.0 : std::log(static_cast<double>(corpus_size_));
}

double cider_d_sentence(std::span<const TokenId> candidate, const References& refs,
                        const NGramStats& stats, double sigma) {
  require_refs(refs, "cider_d");
  const CiderVector cand = cider_vector(candidate, stats);
  double total = 0.0;
  for (const Sentence& r : refs) {
    const auto val = cider_similarity(cand, cider_vector(r, stats), sigma);
    double mean = 0.0;
    for (double v : val) mean += v;
    total += mean / kMaxOrder;
  }
  return 10.0 * total / static_cast<double>(refs.size());
}

double bleu4_sentence(std::span<const TokenId> candidate, const References& refs) {
  require_refs(refs, "bleu4");
  if (candidate.empty()) return 0.0;
  const BleuCounts b = bleu_counts(candidate, refs);
  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    const double correct = b.correct[n] > 0.0 ? b.correct[n] : kBleuSmoothing;
    log_sum += std::log(correct / std::max(b.guess[n], 1.0));
  }
  return brevity_penalty(b.cand_len, b.ref_len) * std::exp(log_sum / kMaxOrder);
}

double rouge_l_sentence(std::span<const TokenId> candidate, const References& refs) {
  require_refs(refs, "rouge_l");
  if (candidate.empty()) return 0.0;
  double best = 0.0;
  const double beta2 = kRougeBeta * kRougeBeta;
  for (const Sentence& r : refs) {
    if (r.empty()) continue;
    const double lcs = static_cast<double>(lcs_length(candidate, r));
    const double p = lcs / static_cast<double>(candidate.size());
    const double rec = lcs / static_cast<double>(r.size());
    if (p > 0.0 && rec > 0.0) best = std::max(best, (1.0 + beta2) * p * rec / (rec + beta2 * p));
  }
  return best;
}

MetricScore cider_d(const std::vector<Sentence>& candidates,
                    const std::vector<References>& references, const NGramStats& stats,
                    double sigma) {
  require_parallel(candidates.size(), references.size());
  MetricScore out;
  out.kind = MetricKind::kCiderD;
  RewardOptions opt;
  opt.include_eos = stats.include_eos();
  opt.sigma = sigma;
  out.sentence_scores = reward_fn(MetricKind::kCiderD, candidates, references, stats, opt);
  double sum = 0.0;
  for (double s : out.sentence_scores) sum += s;
  out.corpus_score = candidates.empty() ? 0.0 : sum / static_cast<double>(candidates.size());
  return out;
}

MetricScore bleu4(const std::vector<Sentence>& candidates,
                  const std::vector<References>& references, bool include_eos) {
  require_parallel(candidates.size(), references.size());
  MetricScore out;
  out.kind = MetricKind::kBleu4;
  BleuCounts total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Sentence cand = tokenize_for_reward(candidates[i], include_eos);
    const References refs = prepare_refs(references[i], include_eos);
    out.sentence_scores.push_back(bleu4_sentence(cand, refs));
    const BleuCounts b = bleu_counts(cand, refs);
    for (int n = 0; n < kMaxOrder; ++n) {
      total.guess[n] += b.guess[n];
      total.correct[n] += b.correct[n];
    }
    total.cand_len += b.cand_len;
    total.ref_len += b.ref_len;
  }
  double log_sum = 0.0;
  bool zero = candidates.empty();
  for (int n = 0; n < kMaxOrder && !zero; ++n) {
    if (total.correct[n] <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(total.correct[n] / total.guess[n]);
    }
  }
  out.corpus_score =
      zero ? 0.0 : brevity_penalty(total.cand_len, total.ref_len) * std::exp(log_sum / kMaxOrder);
  return out;
}

MetricScore rouge_l(const std::vector<Sentence>& candidates,
                    const std::vector<References>& references, bool include_eos) {
  require_parallel(candidates.size(), references.size());
  MetricScore out;
  out.kind = MetricKind::kRougeL;
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = rouge_l_sentence(tokenize_for_reward(candidates[i], include_eos),
                                      prepare_refs(references[i], include_eos));
    out.sentence_scores.push_back(s);
    sum += s;
  }
  out.corpus_score = candidates.empty() ? 0.0 : sum / static_cast<double>(candidates.size());
  return out;
}

double sentence_reward(MetricKind kind, std::span<const TokenId> candidate,
                       const References& references, const NGramStats& stats,
                       const RewardOptions& opt) {
  const Sentence cand = tokenize_for_reward(candidate, opt.include_eos);
  const References refs = prepare_refs(references, opt.include_eos);
  switch (kind) {
    case MetricKind::kCiderD:
      if (stats.include_eos() != opt.include_eos) {
        throw UsageError("cider_d: n-gram statistics built with a different EOS policy");
      }
      return cider_d_sentence(cand, refs, stats, opt.sigma);
    case MetricKind::kBleu4:
      return bleu4_sentence(cand, refs);
    case MetricKind::kRougeL:
      return rouge_l_sentence(cand, refs);
  }
  throw UsageError("unknown metric kind");
}

std::vector<double> reward_fn(MetricKind kind, const std::vector<Sentence>& candidates,
                              const std::vector<References>& references,
                              const NGramStats& stats, const RewardOptions& opt) {
  require_parallel(candidates.size(), references.size());
  std::vector<double> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.push_back(sentence_reward(kind, candidates[i], references[i], stats, opt));
  }
  return out;
}

EvalSummary evaluate_all(const std::vector<Sentence>& candidates,
                         const std::vector<References>& references, const NGramStats& stats) {
  return {cider_d(candidates, references, stats), bleu4(candidates, references, stats.include_eos()),
          rouge_l(candidates, references, stats.include_eos())};
}

}  // namespace scst
