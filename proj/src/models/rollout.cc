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

#include "scst/rollout.h"

#include <cmath>

#include "scst/error.h"
#include "scst/ops.h"

namespace scst {

const char* rollout_mode_name(RolloutMode mode) {
  switch (mode) {
    case RolloutMode::kTeacher: return "teacher";
    case RolloutMode::kScheduled: return "scheduled";
    case RolloutMode::kSampled: return "sampled";
    case RolloutMode::kGreedy: return "greedy";
    case RolloutMode::kMixed: return "mixed";
  }
  return "unknown";
}

StepState Rollout::state_after(std::size_t steps) const {
  if (steps > trace.size()) throw UsageError("state_after: beyond rollout length");
  if (steps == 0) return initial;
  const StepCache& k = trace[steps - 1];
  StepState s;
  s.h = k.h;
  s.c = k.c;
  s.t = steps;
  s.context = initial.context;
  s.alpha = k.alpha;
  return s;
}

double Rollout::total_logprob() const {
  double acc = 0.0;
  for (double lp : logprobs) acc += lp;
  return acc;
}

Rollout rollout(const Captioner& model, const ImageFeatures& features,
                const RolloutOptions& opt, Rng* rng) {
  const std::size_t max_len = opt.max_len ? opt.max_len : model.config().max_len;
  const bool needs_ref = opt.mode == RolloutMode::kTeacher ||
                         opt.mode == RolloutMode::kScheduled ||
                         opt.mode == RolloutMode::kMixed;
  if (needs_ref && (opt.reference == nullptr || opt.reference->empty())) {
    throw UsageError(std::string(rollout_mode_name(opt.mode)) +
                     " rollout requires a reference sequence");
  }
  const bool needs_rng = opt.mode == RolloutMode::kScheduled ||
                         opt.mode == RolloutMode::kSampled || opt.mode == RolloutMode::kMixed;
  if (needs_rng && rng == nullptr) {
    throw UsageError(std::string(rollout_mode_name(opt.mode)) + " rollout requires an rng");
  }
  if (opt.feedback_prob < 0.0 || opt.feedback_prob > 1.0) {
    throw UsageError("feedback probability must lie in [0, 1]");
  }

  Rollout r;
  r.mode = opt.mode;
  r.initial = model.initial_state(features);
  const std::vector<TokenId>* ref = opt.reference;
  const std::size_t ref_len = ref ? std::min(ref->size(), max_len) : 0;
  const std::size_t prefix = std::min(opt.teacher_prefix, ref_len);

  StepState state = r.initial;
  TokenId prev = kBos;
  for (std::size_t t = 0; t < max_len; ++t) {
    const bool ref_mode =
        opt.mode == RolloutMode::kTeacher || opt.mode == RolloutMode::kScheduled;
    if (ref_mode && t >= ref_len) break;
    const bool ground_truth_step = ref_mode || (opt.mode == RolloutMode::kMixed && t < prefix);

    r.trace.emplace_back();
    StepResult out = model.step(state, prev, &r.trace.back());
    const std::vector<double>& post = r.trace.back().posterior;
    r.inputs.push_back(prev);

    TokenId emitted;
    if (ground_truth_step) {
      emitted = (*ref)[t];
    } else if (opt.mode == RolloutMode::kGreedy) {
      emitted = argmax_token(post);
    } else {
      emitted = static_cast<TokenId>(rng->categorical(post));
    }
    if (emitted < 0 || static_cast<std::size_t>(emitted) >= post.size()) {
      throw InputError("reference token " + std::to_string(emitted) + " outside vocabulary");
    }
    r.tokens.push_back(emitted);
    r.logprobs.push_back(std::log(post[static_cast<std::size_t>(emitted)]));
    state = std::move(out.state);

    if (emitted == kEos) {
      r.ended_with_eos = true;
      break;
    }
    prev = emitted;
    if (opt.mode == RolloutMode::kScheduled) {
      // Per-step Bernoulli(p): feed back a posterior sample instead of w*_t.
      if (rng->bernoulli(opt.feedback_prob)) prev = static_cast<TokenId>(rng->categorical(post));
    }
  }
  return r;
}

Rollout forced_rollout(const Captioner& model, const ImageFeatures& features,
                       const std::vector<TokenId>& tokens) {
  RolloutOptions opt;
  opt.mode = RolloutMode::kTeacher;
  opt.reference = &tokens;
  opt.max_len = std::max<std::size_t>(tokens.size(), 1);
  return rollout(model, features, opt);
}

std::vector<TokenId> greedy_complete(const Captioner& model, StepState state, TokenId last,
                                     std::size_t max_len) {
  std::vector<TokenId> out;
  TokenId prev = last;
  while (state.t < max_len) {
    StepResult r = model.step(state, prev);
    softmax_inplace(r.logits);
    const TokenId w = argmax_token(r.logits);
    out.push_back(w);
    state = std::move(r.state);
    if (w == kEos) break;
    prev = w;
  }
  return out;
}

std::vector<std::vector<double>> xe_logits_grad(const Rollout& r) {
  std::vector<std::vector<double>> g(r.length());
  for (std::size_t t = 0; t < r.length(); ++t) {
    g[t] = r.trace[t].posterior;
    g[t][static_cast<std::size_t>(r.tokens[t])] -= 1.0;
  }
  return g;
}

double xe_loss(const Rollout& r) { return -r.total_logprob(); }

void backprop_through_time(const Captioner& model, const Rollout& r,
                           std::span<const std::vector<double>> dlogits, GradSet& grads) {
  if (dlogits.size() != r.length()) {
    throw UsageError("backprop_through_time: got " + std::to_string(dlogits.size()) +
                     " logits gradients for " + std::to_string(r.length()) + " steps");
  }
  model.backward(*r.initial.context, r.trace, dlogits, grads);
}

}  // namespace scst
