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

// Caption metrics over token-id sentences: CIDEr-D, BLEU-4 and ROUGE-L.
//
// Candidates go through tokenize_for_reward, which cuts at the first EOS and
// keeps that EOS as a scorable word. References are expected in the same
// form (ending in EOS). With include_eos = false every EOS is stripped from
// both sides, which is the legacy behaviour kept as a regression guard.

#ifndef SCST_METRICS_H_
#define SCST_METRICS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scst/model.h"

namespace scst {

using Sentence = std::vector<TokenId>;
using References = std::vector<Sentence>;

enum class MetricKind { kCiderD, kBleu4, kRougeL };

const char* metric_name(MetricKind kind);
// Accepts "cider", "cider-d", "bleu", "bleu4", "rouge", "rouge-l" (any case).
MetricKind parse_metric(const std::string& name);

struct MetricScore {
  MetricKind kind = MetricKind::kCiderD;
  std::vector<double> sentence_scores;
  double corpus_score = 0.0;
};

// [a, b, EOS, c] -> [a, b, EOS]; sequences without EOS pass through.
Sentence tokenize_for_reward(std::span<const TokenId> sequence, bool include_eos = true);
Sentence strip_eos(std::span<const TokenId> sentence);

// Packed n-gram key, n in 1..4. Token ids must be below 2^15.
using NGramKey = std::uint64_t;
NGramKey ngram_key(std::span<const TokenId> words);
// Counts of every n-gram of order 1..4 in `s`.
std::map<NGramKey, int> ngram_counts(std::span<const TokenId> s);

// Document frequencies over a frozen reference corpus: for each n-gram, the
// number of images whose reference set contains it.
class NGramStats {
 public:
  NGramStats() = default;
  static NGramStats build(const std::vector<References>& corpus, bool include_eos = true);

  double document_frequency(NGramKey key) const;
  std::size_t corpus_size() const { return corpus_size_; }
  double log_corpus_size() const;
  bool include_eos() const { return include_eos_; }

 private:
  std::map<NGramKey, int> df_;
  std::size_t corpus_size_ = 0;
  bool include_eos_ = true;
};

inline constexpr double kCiderSigma = 6.0;
inline constexpr double kBleuSmoothing = 1e-9;
inline constexpr double kRougeBeta = 1.2;

// CIDEr-D of one candidate against its references (already in scoring
// form). Empty `refs` is a UsageError.
double cider_d_sentence(std::span<const TokenId> candidate, const References& refs,
                        const NGramStats& stats, double sigma = kCiderSigma);
// Smoothed sentence-level BLEU-4.
double bleu4_sentence(std::span<const TokenId> candidate, const References& refs);
// Best LCS F-measure over the references.
double rouge_l_sentence(std::span<const TokenId> candidate, const References& refs);

// Corpus-level scoring. Candidates are raw decoded sequences; they are run
// through tokenize_for_reward first. CIDEr-D and ROUGE-L corpus scores are
// sentence means; BLEU-4 pools clipped counts across the corpus.
MetricScore cider_d(const std::vector<Sentence>& candidates,
                    const std::vector<References>& references, const NGramStats& stats,
                    double sigma = kCiderSigma);
MetricScore bleu4(const std::vector<Sentence>& candidates,
                  const std::vector<References>& references, bool include_eos = true);
MetricScore rouge_l(const std::vector<Sentence>& candidates,
                    const std::vector<References>& references, bool include_eos = true);

struct RewardOptions {
  bool include_eos = true;
  double sigma = kCiderSigma;
};

// Per-example sentence-level rewards. `stats` is only consulted for CIDEr-D.
std::vector<double> reward_fn(MetricKind kind, const std::vector<Sentence>& candidates,
                              const std::vector<References>& references,
                              const NGramStats& stats, const RewardOptions& options = {});
double sentence_reward(MetricKind kind, std::span<const TokenId> candidate,
                       const References& references, const NGramStats& stats,
                       const RewardOptions& options = {});

struct EvalSummary {
  MetricScore cider;
  MetricScore bleu;
  MetricScore rouge;
};
EvalSummary evaluate_all(const std::vector<Sentence>& candidates,
                         const std::vector<References>& references, const NGramStats& stats);

}  // namespace scst

#endif  // SCST_METRICS_H_
