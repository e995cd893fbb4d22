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

// Policy-gradient estimators for sequence models.
//
// Every estimator produces dL/ds_t for the realised steps of one sampled
// rollout, in the same sign convention as cross entropy: the loss being
// minimised is -E[r], so step t gets advantage_t * (posterior_t - onehot(w_t)).
// Steps after the first EOS do not exist in a rollout and receive nothing.

#ifndef SCST_RL_H_
#define SCST_RL_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scst/adam.h"
#include "scst/model.h"
#include "scst/param_store.h"
#include "scst/rollout.h"

namespace scst {

using LogitsGrad = std::vector<std::vector<double>>;
// Reward of a raw decoded sequence for one fixed example.
using SequenceReward = std::function<double(std::span<const TokenId>)>;

enum class Estimator { kReinforce, kLearnedBaseline, kMixer, kScst, kTdScst, kTrueScst };

const char* estimator_name(Estimator e);
// reinforce | baseline | mixer | scst | td-scst | true-scst
Estimator parse_estimator(const std::string& name);

struct Episode {
  Rollout sample;
  std::optional<Rollout> greedy;
  double reward = 0.0;
  // Sequence-level baseline: 0 for plain REINFORCE, r(greedy) for SCST, the
  // mean learned prediction otherwise. Per-step baselines live in advantages.
  double baseline = 0.0;
  std::vector<double> advantages;
  LogitsGrad grads;
  // Leading teacher-forced steps trained with cross entropy (MIXER).
  std::size_t xe_steps = 0;
};
using EpisodeBatch = std::vector<Episode>;

// advantages[t] * (posterior_t - onehot(w_t)) for every step.
LogitsGrad advantage_grad(const Rollout& r, std::span<const double> advantages);

// Fills reward, baseline, advantages and grads. b = 0 gives plain REINFORCE.
void reinforce_grad(Episode& ep, const SequenceReward& reward, double baseline);
// b = r(greedy); UsageError if the episode has no greedy rollout.
void scst_grad(Episode& ep, const SequenceReward& reward);
// Step t is baselined by r(w^s_{<t} + greedy completion).
void td_scst_grad(Episode& ep, const Captioner& model, const SequenceReward& reward);
// Step t's reward is r(w^s_{<=t+n} + greedy completion) instead of r(w^s),
// baselined as in TD-SCST. Biased by construction. UsageError if n < 1.
void true_scst_grad(Episode& ep, const Captioner& model, const SequenceReward& reward,
                    std::size_t n);

// The sampled prefix of `sample` of length `prefix`, completed greedily up
// to the model's max_len. Uses the cached decoder state at `prefix`.
std::vector<TokenId> complete_greedily(const Captioner& model, const Rollout& sample,
                                       std::size_t prefix);

// Linear map from h_t to a reward estimate with its own ADAM state. It is
// fed detached hidden states and never writes into model gradients.
class LearnedBaseline {
 public:
  LearnedBaseline(std::size_t hidden, const AdamConfig& adam);

  double predict(std::span<const double> h) const;
  // Mean prediction over steps [from, length) of `r`; 0 for an empty range.
  double sequence_baseline(const Rollout& r, std::size_t from = 0) const;
  // One ADAM step on 0.5 * mean over episodes of the mean squared error
  // between per-step predictions (from xe_steps on) and the episode reward.
  // Returns the loss before the step.
  double update(std::span<const Episode> batch);

  const ParamStore& params() const { return store_; }
  ParamStore& params() { return store_; }
  const AdamConfig& adam() const { return adam_; }
  void set_learning_rate(double lr) { adam_.learning_rate = lr; }

 private:
  ParamStore store_;
  AdamConfig adam_;
};

// REINFORCE with the learned baseline's sequence prediction as b.
void learned_baseline_grad(Episode& ep, const SequenceReward& reward,
                           const LearnedBaseline& baseline);

// Number of trailing words trained under the reward, growing by `step`
// every epoch from `initial`, capped at max_len.
struct MixerSchedule {
  std::size_t initial = 1;
  std::size_t step = 1;
  std::size_t max_len = 12;

  std::size_t rl_words(int epoch) const;
  // XE prefix length for a reference of `ref_len` words, clamped to max_len.
  std::size_t boundary(int epoch, std::size_t ref_len) const;
};

// Teacher-forced for `boundary` steps of `reference`, then sampled. The
// prefix gets the XE gradient, the suffix the learned-baseline REINFORCE
// gradient with b averaged over suffix steps only.
Episode mixer_episode(const Captioner& model, const ImageFeatures& features,
                      const std::vector<TokenId>& reference, std::size_t boundary, Rng& rng,
                      const SequenceReward& reward, const LearnedBaseline& baseline);

struct EstimatorDiagnostics {
  double grad_variance = 0.0;
  double posterior_entropy = 0.0;
};

// Per-coordinate variance across the batch of the flattened logits
// gradients, each zero-padded to max_len x vocab, averaged over coordinates.
double gradient_variance(std::span<const LogitsGrad> grads, std::size_t max_len,
                         std::size_t vocab);
// Mean entropy of the posteriors at every sampled step.
double mean_posterior_entropy(std::span<const Episode> batch);
EstimatorDiagnostics estimator_diagnostics(std::span<const Episode> batch, std::size_t max_len,
                                           std::size_t vocab);

}  // namespace scst

#endif  // SCST_RL_H_
