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

#include "scst/rl.h"

#include <algorithm>
#include <cctype>

#include "scst/error.h"
#include "scst/ops.h"

namespace scst {

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kReinforce: return "reinforce";
    case Estimator::kLearnedBaseline: return "baseline";
    case Estimator::kMixer: return "mixer";
    case Estimator::kScst: return "scst";
    case Estimator::kTdScst: return "td-scst";
    case Estimator::kTrueScst: return "true-scst";
  }
  return "unknown";
}

Estimator parse_estimator(const std::string& name) {
  std::string n;
  for (char ch : name) n.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(ch)));
  for (Estimator e : {Estimator::kReinforce, Estimator::kLearnedBaseline, Estimator::kMixer,
                      Estimator::kScst, Estimator::kTdScst, Estimator::kTrueScst}) {
    if (n == estimator_name(e)) return e;
  }
  throw UsageError("unknown estimator '" + name +
                   "' (expected reinforce, baseline, mixer, scst, td-scst or true-scst)");
}

LogitsGrad advantage_grad(const Rollout& r, std::span<const double> advantages) {
  if (advantages.size() != r.length()) {
    throw UsageError("advantage count " + std::to_string(advantages.size()) +
                     " does not match rollout length " + std::to_string(r.length()));
  }
  LogitsGrad g(r.length());
  for (std::size_t t = 0; t < r.length(); ++t) {
    g[t] = r.trace[t].posterior;
    g[t][static_cast<std::size_t>(r.tokens[t])] -= 1.0;
    for (double& v : g[t]) v *= advantages[t];
  }
  return g;
}

void reinforce_grad(Episode& ep, const SequenceReward& reward, double baseline) {
  ep.reward = reward(ep.sample.tokens);
  ep.baseline = baseline;
  ep.advantages.assign(ep.sample.length(), ep.reward - baseline);
  ep.grads = advantage_grad(ep.sample, ep.advantages);
}

void scst_grad(Episode& ep, const SequenceReward& reward) {
  if (!ep.greedy) throw UsageError("SCST needs the greedy rollout of the same example");
  reinforce_grad(ep, reward, reward(ep.greedy->tokens));
}

std::vector<TokenId> complete_greedily(const Captioner& model, const Rollout& sample,
                                       std::size_t prefix) {
  if (prefix > sample.length()) throw UsageError("completion prefix beyond sample length");
  std::vector<TokenId> seq(sample.tokens.begin(),
                           sample.tokens.begin() + static_cast<std::ptrdiff_t>(prefix));
  if (prefix > 0 && seq.back() == kEos) return seq;
  const TokenId last = prefix ? seq.back() : kBos;
  const std::vector<TokenId> tail =
      greedy_complete(model, sample.state_after(prefix), last, model.config().max_len);
  seq.insert(seq.end(), tail.begin(), tail.end());
  return seq;
}

void td_scst_grad(Episode& ep, const Captioner& model, const SequenceReward& reward) {
  const std::size_t L = ep.sample.length();
  ep.reward = reward(ep.sample.tokens);
  ep.advantages.resize(L);
  for (std::size_t t = 0; t < L; ++t) {
    ep.advantages[t] = ep.reward - reward(complete_greedily(model, ep.sample, t));
  }
  ep.baseline = L ? ep.reward - ep.advantages[0] : 0.0;
  ep.grads = advantage_grad(ep.sample, ep.advantages);
}

void true_scst_grad(Episode& ep, const Captioner& model, const SequenceReward& reward,
                    std::size_t n) {
  if (n < 1) throw UsageError("true SCST lookahead must be at least 1");
  const std::size_t L = ep.sample.length();
  ep.reward = reward(ep.sample.tokens);
  ep.advantages.resize(L);
  for (std::size_t t = 0; t < L; ++t) {
    const std::size_t ahead = std::min(L, t + 1 + n);
    const double primary =
        ahead == L ? ep.reward : reward(complete_greedily(model, ep.sample, ahead));
    ep.advantages[t] = primary - reward(complete_greedily(model, ep.sample, t));
  }
  ep.baseline = L ? ep.reward - ep.advantages[0] : 0.0;
  ep.grads = advantage_grad(ep.sample, ep.advantages);
}

LearnedBaseline::LearnedBaseline(std::size_t hidden, const AdamConfig& adam) : adam_(adam) {
  adam_.validate();
  store_.add("baseline.w", Tensor({hidden}));
  store_.add("baseline.b", Tensor({1}));
}

double LearnedBaseline::predict(std::span<const double> h) const {
  const Tensor& w = store_.value(0);
  if (h.size() != w.size()) throw DimensionError("baseline input has wrong width");
  double acc = store_.value(1)[0];
  for (std::size_t i = 0; i < h.size(); ++i) acc += w[i] * h[i];
  return acc;
}

double LearnedBaseline::sequence_baseline(const Rollout& r, std::size_t from) const {
  if (from >= r.length()) return 0.0;
  double acc = 0.0;
  for (std::size_t t = from; t < r.length(); ++t) acc += predict(r.trace[t].h);
  return acc / static_cast<double>(r.length() - from);
}

double LearnedBaseline::update(std::span<const Episode> batch) {
  GradSet& g = store_.grads();
  g.zero();
  double loss = 0.0;
  std::size_t counted = 0;
  for (const Episode& ep : batch) {
    const std::size_t from = ep.xe_steps;
    const std::size_t L = ep.sample.length();
    if (from >= L) continue;
    ++counted;
    const double inv = 1.0 / static_cast<double>(L - from);
    for (std::size_t t = from; t < L; ++t) {
      const std::vector<double>& h = ep.sample.trace[t].h;
      const double err = predict(h) - ep.reward;
      loss += 0.5 * err * err * inv;
      for (std::size_t i = 0; i < h.size(); ++i) g[0][i] += err * inv * h[i];
      g[1][0] += err * inv;
    }
  }
  if (counted == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(counted);
  g.scale(scale);
  adam_step(store_, adam_);
  return loss * scale;
}

void learned_baseline_grad(Episode& ep, const SequenceReward& reward,
                           const LearnedBaseline& baseline) {
  reinforce_grad(ep, reward, baseline.sequence_baseline(ep.sample));
}

std::size_t MixerSchedule::rl_words(int epoch) const {
  const std::size_t e = static_cast<std::size_t>(std::max(epoch, 0));
  return std::min(max_len, initial + step * e);
}

std::size_t MixerSchedule::boundary(int epoch, std::size_t ref_len) const {
  const std::size_t len = std::min(ref_len, max_len);
  const std::size_t n = rl_words(epoch);
  return len > n ? len - n : 0;
}

Episode mixer_episode(const Captioner& model, const ImageFeatures& features,
                      const std::vector<TokenId>& reference, std::size_t boundary, Rng& rng,
                      const SequenceReward& reward, const LearnedBaseline& baseline) {
  RolloutOptions opt;
  opt.mode = RolloutMode::kMixed;
  opt.reference = &reference;
  opt.teacher_prefix = std::min(boundary, model.config().max_len);
  Episode ep;
  ep.sample = rollout(model, features, opt, &rng);
  const std::size_t L = ep.sample.length();
  ep.xe_steps = std::min({opt.teacher_prefix, reference.size(), L});
  ep.reward = reward(ep.sample.tokens);
  ep.baseline = baseline.sequence_baseline(ep.sample, ep.xe_steps);
  ep.advantages.assign(L, ep.reward - ep.baseline);
  ep.grads = advantage_grad(ep.sample, ep.advantages);
  // Prefix steps: plain cross entropy against the teacher tokens.
  for (std::size_t t = 0; t < ep.xe_steps; ++t) {
    ep.advantages[t] = 0.0;
    ep.grads[t] = ep.sample.trace[t].posterior;
    ep.grads[t][static_cast<std::size_t>(ep.sample.tokens[t])] -= 1.0;
  }
  return ep;
}

double gradient_variance(std::span<const LogitsGrad> grads, std::size_t max_len,
                         std::size_t vocab) {
  const std::size_t B = grads.size();
  if (B < 2) return 0.0;
  const std::size_t D = max_len * vocab;
  // Welford per coordinate; identical inputs give exactly zero.
  std::vector<double> mean(D, 0.0), m2(D, 0.0);
  std::size_t k = 0;
  for (const LogitsGrad& g : grads) {
    if (g.size() > max_len) throw DimensionError("gradient longer than max_len");
    ++k;
    for (std::size_t d = 0; d < D; ++d) {
      const std::size_t t = d / vocab;
      if (t < g.size() && g[t].size() != vocab) {
        throw DimensionError("gradient row has wrong vocab size");
      }
      const double x = t < g.size() ? g[t][d % vocab] : 0.0;
      const double delta = x - mean[d];
      mean[d] += delta / static_cast<double>(k);
      m2[d] += delta * (x - mean[d]);
    }
  }
  double acc = 0.0;
  for (double s : m2) acc += s / static_cast<double>(B);
  return acc / static_cast<double>(D);
}

double mean_posterior_entropy(std::span<const Episode> batch) {
  double acc = 0.0;
  std::size_t steps = 0;
  for (const Episode& ep : batch) {
    for (std::size_t t = ep.xe_steps; t < ep.sample.length(); ++t) {
      acc += entropy(ep.sample.trace[t].posterior);
      ++steps;
    }
  }
  return steps ? acc / static_cast<double>(steps) : 0.0;
}

EstimatorDiagnostics estimator_diagnostics(std::span<const Episode> batch, std::size_t max_len,
                                           std::size_t vocab) {
  std::vector<LogitsGrad> g;
  g.reserve(batch.size());
  for (const Episode& ep : batch) g.push_back(ep.grads);
  return {gradient_variance(g, max_len, vocab), mean_posterior_entropy(batch)};
}

}  // namespace scst
