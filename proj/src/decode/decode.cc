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

#include "scst/decode.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "scst/error.h"
#include "scst/ops.h"

namespace scst {
namespace {

std::size_t resolve_len(const Ensemble& models, std::size_t max_len) {
  return max_len ? max_len : models.max_len();
}

// Score descending, then token sequence ascending so ties resolve toward
// lower ids just like argmax.
bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

}  // namespace

void BeamConfig::validate() const {
  if (width < 1) throw ConfigError("beam width must be at least 1");
  if (!(prune_margin > 0.0)) throw ConfigError("prune margin must be positive");
}

double Hypothesis::mean_logprob() const {
  return logprobs.empty() ? 0.0 : score / static_cast<double>(logprobs.size());
}

Ensemble::Ensemble(std::vector<const Captioner*> members) : members_(std::move(members)) {
  if (members_.empty()) throw UsageError("ensemble needs at least one model");
  for (const Captioner* m : members_) {
    if (m == nullptr) throw UsageError("ensemble member is null");
    if (m->config().vocab_size != vocab_size()) {
      throw UsageError("ensemble vocab mismatch: " + std::to_string(m->config().vocab_size) +
                       " vs " + std::to_string(vocab_size()));
    }
    if (m->config().max_len != max_len()) {
      throw UsageError("ensemble max_len mismatch: " + std::to_string(m->config().max_len) +
                       " vs " + std::to_string(max_len()));
    }
  }
}

std::vector<StepState> Ensemble::initial_states(const ImageFeatures& features) const {
  std::vector<StepState> s;
  s.reserve(members_.size());
  for (const Captioner* m : members_) s.push_back(m->initial_state(features));
  return s;
}

std::vector<double> Ensemble::step(std::vector<StepState>& states, TokenId prev) const {
  std::vector<std::vector<double>> posts(members_.size());
  for (std::size_t k = 0; k < members_.size(); ++k) {
    StepResult r = members_[k]->step(states[k], prev);
    softmax_inplace(r.logits);
    posts[k] = std::move(r.logits);
    states[k] = std::move(r.state);
  }
  if (posts.size() == 1) return std::move(posts.front());
  return average_posteriors(posts);
}

std::vector<double> average_posteriors(std::span<const std::vector<double>> posteriors) {
  if (posteriors.empty()) throw UsageError("no posteriors to average");
  std::vector<double> avg(posteriors.front().size(), 0.0);
  for (const auto& p : posteriors) {
    if (p.size() != avg.size()) throw DimensionError("posterior sizes differ");
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += p[i];
  }
  const double k = static_cast<double>(posteriors.size());
  for (double& v : avg) v /= k;
  return avg;
}

Hypothesis greedy_decode(const Ensemble& models, const ImageFeatures& features,
                         std::size_t max_len) {
  const std::size_t T = resolve_len(models, max_len);
  Hypothesis h;
  h.states = models.initial_states(features);
  TokenId prev = kBos;
  for (std::size_t t = 0; t < T; ++t) {
    const std::vector<double> post = models.step(h.states, prev);
    const TokenId w = argmax_token(post);
    const double lp = std::log(post[static_cast<std::size_t>(w)]);
    h.tokens.push_back(w);
    h.logprobs.push_back(lp);
    h.score += lp;
    if (w == kEos) break;
    prev = w;
  }
  h.finished = true;
  return h;
}

Hypothesis greedy_decode(const Captioner& model, const ImageFeatures& features,
                         std::size_t max_len) {
  return greedy_decode(Ensemble({&model}), features, max_len);
}

void prune_by_margin(std::vector<Hypothesis>& hyps, double margin) {
  if (hyps.empty()) return;
  double best = hyps.front().score;
  for (const Hypothesis& h : hyps) best = std::max(best, h.score);
  std::erase_if(hyps, [&](const Hypothesis& h) { return best - h.score > margin; });
}

std::vector<Hypothesis> beam_search(const Ensemble& models, const ImageFeatures& features,
                                    const BeamConfig& cfg) {
  cfg.validate();
  const std::size_t T = resolve_len(models, cfg.max_len);
  const std::size_t V = models.vocab_size();

  std::vector<Hypothesis> live(1);
  live.front().states = models.initial_states(features);
  std::vector<Hypothesis> finished;

  for (std::size_t t = 0; t < T && !live.empty(); ++t) {
    std::vector<Hypothesis> expansions;
    expansions.reserve(live.size() * V);
    for (Hypothesis& parent : live) {
      const TokenId prev = parent.tokens.empty() ? kBos : parent.tokens.back();
      std::vector<StepState> states = parent.states;
      const std::vector<double> post = models.step(states, prev);
      for (std::size_t w = 0; w < V; ++w) {
        if (post[w] <= 0.0) continue;
        Hypothesis child;
        child.tokens = parent.tokens;
        child.tokens.push_back(static_cast<TokenId>(w));
        child.logprobs = parent.logprobs;
        child.logprobs.push_back(std::log(post[w]));
        child.score = parent.score + child.logprobs.back();
        child.finished = w == static_cast<std::size_t>(kEos) || t + 1 == T;
        child.states = states;
        expansions.push_back(std::move(child));
      }
    }
    const std::size_t keep = std::min(cfg.width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep),
                      expansions.end(), ranks_before);
    expansions.resize(keep);
    prune_by_margin(expansions, cfg.prune_margin);

    live.clear();
    for (Hypothesis& h : expansions) {
      if (h.finished) {
        h.states.clear();
        finished.push_back(std::move(h));
      } else {
        live.push_back(std::move(h));
      }
    }

    // Scores only decrease, so once width finished hypotheses beat every
    // live one nothing left can enter the result.
    if (finished.size() >= cfg.width && !live.empty()) {
      std::sort(finished.begin(), finished.end(), ranks_before);
      double best_live = live.front().score;
      for (const Hypothesis& h : live) best_live = std::max(best_live, h.score);
      if (finished[cfg.width - 1].score >= best_live) live.clear();
    }
  }

  std::sort(finished.begin(), finished.end(), ranks_before);
  if (finished.size() > cfg.width) finished.resize(cfg.width);
  prune_by_margin(finished, cfg.prune_margin);
  return finished;
}

std::vector<Hypothesis> beam_search(const Captioner& model, const ImageFeatures& features,
                                    const BeamConfig& cfg) {
  return beam_search(Ensemble({&model}), features, cfg);
}

Hypothesis decode(const Ensemble& models, const ImageFeatures& features, const BeamConfig& cfg) {
  cfg.validate();
  if (cfg.width == 1) return greedy_decode(models, features, cfg.max_len);
  std::vector<Hypothesis> hyps = beam_search(models, features, cfg);
  return std::move(hyps.front());
}

}  // namespace scst
