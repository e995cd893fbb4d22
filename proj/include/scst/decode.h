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

// Test-time decoding: greedy, beam search with log-prob margin pruning, and
// ensembles that average member posteriors in probability space.
//
// Every entry point takes a list of models; a single model is an ensemble
// of one and decodes exactly as on its own. Beam scores are raw summed
// log-probs with no length normalisation.

#ifndef SCST_DECODE_H_
#define SCST_DECODE_H_

#include <limits>
#include <span>
#include <vector>

#include "scst/model.h"

namespace scst {

inline constexpr double kDefaultPruneMargin = 5.0;

struct BeamConfig {
  std::size_t width = 1;
  // A hypothesis is dropped when its score is more than this far below the
  // best one; exactly at the margin it survives.
  double prune_margin = kDefaultPruneMargin;
  // 0 means the models' max_len.
  std::size_t max_len = 0;

  // ConfigError unless width >= 1 and prune_margin > 0.
  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;
  std::vector<double> logprobs;
  double score = 0.0;
  bool finished = false;
  std::vector<StepState> states;  // one per ensemble member

  double mean_logprob() const;
};

// Members must agree on vocab size and max_len (UsageError otherwise).
class Ensemble {
 public:
  explicit Ensemble(std::vector<const Captioner*> members);

  std::size_t size() const { return members_.size(); }
  std::size_t vocab_size() const { return members_.front()->config().vocab_size; }
  std::size_t max_len() const { return members_.front()->config().max_len; }

  std::vector<StepState> initial_states(const ImageFeatures& features) const;
  // Steps every member from `states` on `prev`, writes the averaged posterior
  // and advances the states in place.
  std::vector<double> step(std::vector<StepState>& states, TokenId prev) const;

 private:
  std::vector<const Captioner*> members_;
};

// Elementwise mean, summed in member order.
std::vector<double> average_posteriors(std::span<const std::vector<double>> posteriors);

// Argmax decode (ties to the lowest id) until EOS or max_len steps.
Hypothesis greedy_decode(const Ensemble& models, const ImageFeatures& features,
                         std::size_t max_len = 0);
Hypothesis greedy_decode(const Captioner& model, const ImageFeatures& features,
                         std::size_t max_len = 0);

// Finished hypotheses, best first, at most cfg.width of them. A hypothesis
// still open at max_len is finished without an EOS.
std::vector<Hypothesis> beam_search(const Ensemble& models, const ImageFeatures& features,
                                    const BeamConfig& cfg);
std::vector<Hypothesis> beam_search(const Captioner& model, const ImageFeatures& features,
                                    const BeamConfig& cfg);

// Removes, in place, every hypothesis scoring strictly more than `margin`
// below the best one. Order is preserved.
void prune_by_margin(std::vector<Hypothesis>& hyps, double margin);

// Greedy when cfg.width == 1, otherwise the best beam hypothesis.
Hypothesis decode(const Ensemble& models, const ImageFeatures& features, const BeamConfig& cfg);

}  // namespace scst

#endif  // SCST_DECODE_H_
