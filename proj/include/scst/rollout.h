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

#ifndef SCST_ROLLOUT_H_
#define SCST_ROLLOUT_H_

#include <span>
#include <vector>

#include "scst/model.h"
#include "scst/random.h"

namespace scst {

enum class RolloutMode {
  kTeacher,    // feed ground truth w*_{t-1}
  kScheduled,  // feed a posterior sample with probability p, else ground truth
  kSampled,    // w_t ~ softmax(s_t)
  kGreedy,     // w_t = argmax
  kMixed,      // teacher for a ground-truth prefix, then sampled
};

const char* rollout_mode_name(RolloutMode mode);

// One decoded trajectory. tokens[t] is the word the step-t log-prob refers to
// (the target in teacher/scheduled modes, the emitted word otherwise) and
// inputs[t] the word fed into step t. The sequence stops at the first EOS or
// after max_len steps.
struct Rollout {
  RolloutMode mode = RolloutMode::kGreedy;
  std::vector<TokenId> tokens;
  std::vector<TokenId> inputs;
  std::vector<double> logprobs;
  std::vector<StepCache> trace;
  StepState initial;
  bool ended_with_eos = false;

  std::size_t length() const { return tokens.size(); }
  std::span<const double> posterior(std::size_t t) const { return trace[t].posterior; }
  std::span<const double> logits(std::size_t t) const { return trace[t].logits; }
  // Decoder state after the first `steps` steps (steps <= length()).
  StepState state_after(std::size_t steps) const;
  double total_logprob() const;
};

struct RolloutOptions {
  RolloutMode mode = RolloutMode::kGreedy;
  // Ground-truth sequence (ending in EOS unless truncated). Required for
  // teacher, scheduled and mixed modes.
  const std::vector<TokenId>* reference = nullptr;
  double feedback_prob = 0.0;
  // Number of ground-truth steps before sampling starts (mixed mode);
  // clamped to the reference length.
  std::size_t teacher_prefix = 0;
  // 0 means the model's max_len.
  std::size_t max_len = 0;
};

// `rng` is required for scheduled, sampled and mixed modes.
Rollout rollout(const Captioner& model, const ImageFeatures& features,
                const RolloutOptions& options, Rng* rng = nullptr);

// Teacher-forced pass over an arbitrary token sequence, used to score a
// fixed trajectory (e.g. every sequence of an enumerable model).
Rollout forced_rollout(const Captioner& model, const ImageFeatures& features,
                       const std::vector<TokenId>& tokens);

// Continues greedily from `state`, whose last emitted word is `last`, until
// EOS or `max_len` total steps. Returns only the newly generated words.
std::vector<TokenId> greedy_complete(const Captioner& model, StepState state, TokenId last,
                                     std::size_t max_len);

// dL/ds_t for cross entropy against rollout.tokens: posterior - onehot.
std::vector<std::vector<double>> xe_logits_grad(const Rollout& r);
double xe_loss(const Rollout& r);

// Accumulates parameter gradients for the given per-step logits gradients.
// dlogits must have exactly rollout.length() entries (UsageError otherwise).
void backprop_through_time(const Captioner& model, const Rollout& r,
                           std::span<const std::vector<double>> dlogits, GradSet& grads);

}  // namespace scst

#endif  // SCST_ROLLOUT_H_
