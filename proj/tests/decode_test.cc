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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "enumeration.h"
#include "model_fixtures.h"
#include "scst/decode.h"
#include "scst/error.h"
#include "scst/ops.h"
#include "scst/rollout.h"

namespace scst {
namespace {

using testing::all_sequences;
using testing::random_features;
using testing::randomize;
using testing::sequence_logprob;
using testing::tiny_config;

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr Arch kArchs[] = {Arch::kFc, Arch::kAtt2in, Arch::kAtt2all};

Hypothesis hyp(std::vector<TokenId> tokens, double score) {
  Hypothesis h;
  h.tokens = std::move(tokens);
  h.score = score;
  h.finished = true;
  return h;
}

TEST_CASE("uniform posteriors decode to the lowest id at every step") {
  ModelConfig cfg = tiny_config(Arch::kAtt2in, 7, 4, 5);
  Captioner m(cfg, 1);
  for (std::size_t i = 0; i < m.params().size(); ++i) m.params().value(i).fill(0.0);
  Rng rng(2);
  Hypothesis g = greedy_decode(m, random_features(cfg, rng));
  CHECK(g.tokens == std::vector<TokenId>(5, kBos));
  CHECK(g.score == doctest::Approx(-5.0 * std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("greedy decode matches the greedy rollout and is deterministic") {
  Rng rng(3);
  for (Arch a : kArchs) {
    ModelConfig cfg = tiny_config(a);
    Captioner m(cfg, 4);
    randomize(m, rng, 0.6);
    ImageFeatures f = random_features(cfg, rng);
    Hypothesis g1 = greedy_decode(m, f);
    Hypothesis g2 = greedy_decode(m, f);
    Rollout r = rollout(m, f, {});
    CHECK(g1.tokens == r.tokens);
    CHECK(g1.tokens == g2.tokens);
    CHECK(g1.score == g2.score);
    CHECK(g1.score == doctest::Approx(r.total_logprob()).epsilon(1e-13));
  }
}

TEST_CASE("beam of width one is greedy decoding") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    for (Arch a : kArchs) {
      ModelConfig cfg = tiny_config(a, 9, 6, 7);
      Captioner m(cfg, 10 + trial);
      randomize(m, rng, 0.8);
      ImageFeatures f = random_features(cfg, rng);
      Hypothesis g = greedy_decode(m, f);
      for (double margin : {kDefaultPruneMargin, kInf}) {
        auto beam = beam_search(m, f, {1, margin, 0});
        REQUIRE(beam.size() == 1);
        CHECK(beam[0].tokens == g.tokens);
        CHECK(beam[0].score == g.score);
        CHECK(beam[0].logprobs == g.logprobs);
      }
    }
  }
}

TEST_CASE("exhaustive-width beam finds the enumeration MAP") {
  Rng rng(6);
  const auto seqs = all_sequences(5, 4);
  CHECK(seqs.size() == 1 + 4 + 16 + 64 + 256);
  int beam_beats_greedy = 0;
  for (int trial = 0; trial < 6; ++trial) {
    for (Arch a : kArchs) {
      ModelConfig cfg = tiny_config(a, 5, 6, 4);
      Captioner m(cfg, 20 + trial);
      randomize(m, rng, 1.0);
      ImageFeatures f = random_features(cfg, rng);
      std::vector<TokenId> map_seq;
      double map_lp = -kInf;
      for (const auto& s : seqs) {
        const double lp = sequence_logprob(m, f, s);
        if (lp > map_lp) {
          map_lp = lp;
          map_seq = s;
        }
      }
      auto beam = beam_search(m, f, {625, kInf, 0});
      REQUIRE(!beam.empty());
      CHECK(beam[0].tokens == map_seq);
      CHECK(beam[0].score == doctest::Approx(map_lp).epsilon(1e-12));
      if (beam[0].tokens != greedy_decode(m, f).tokens) ++beam_beats_greedy;
    }
  }
  // The corpus of random models must include cases where search matters.
  CHECK(beam_beats_greedy > 0);
}

TEST_CASE("prune_by_margin keeps a hypothesis exactly at the margin") {
  std::vector<Hypothesis> hyps = {hyp({3}, -1.5), hyp({4}, -6.5), hyp({5}, -6.5000001),
                                  hyp({6}, -2.0)};
  prune_by_margin(hyps, 5.0);
  REQUIRE(hyps.size() == 3);
  CHECK(hyps[0].tokens == std::vector<TokenId>{3});
  CHECK(hyps[1].tokens == std::vector<TokenId>{4});
  CHECK(hyps[2].tokens == std::vector<TokenId>{6});
  std::vector<Hypothesis> empty;
  prune_by_margin(empty, 5.0);
  CHECK(empty.empty());
}

TEST_CASE("beam results are ranked, within the margin and end at the first EOS") {
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    for (Arch a : kArchs) {
      ModelConfig cfg = tiny_config(a, 10, 6, 6);
      Captioner m(cfg, 40 + trial);
      randomize(m, rng, 1.2);
      ImageFeatures f = random_features(cfg, rng);
      const BeamConfig bc{4, 2.0, 0};
      auto beam = beam_search(m, f, bc);
      REQUIRE(!beam.empty());
      CHECK(beam.size() <= 4);
      for (std::size_t i = 0; i < beam.size(); ++i) {
        const Hypothesis& h = beam[i];
        if (i > 0) CHECK(beam[i - 1].score >= h.score);
        CHECK(beam[0].score - h.score <= 2.0);
        CHECK(h.score <= 0.0);
        CHECK(h.finished);
        CHECK(h.tokens.size() <= cfg.max_len);
        for (std::size_t t = 0; t + 1 < h.tokens.size(); ++t) CHECK(h.tokens[t] != kEos);
        if (h.tokens.back() != kEos) CHECK(h.tokens.size() == cfg.max_len);
        CHECK(h.score == doctest::Approx(sequence_logprob(m, f, h.tokens)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("exhaustive beam never scores below greedy; narrow beams can") {
  Rng rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    for (Arch a : kArchs) {
      ModelConfig cfg = tiny_config(a, 5, 6, 4);
      Captioner m(cfg, 60 + trial);
      randomize(m, rng, 1.5);
      ImageFeatures f = random_features(cfg, rng);
      CHECK(beam_search(m, f, {625, kInf, 0})[0].score >= greedy_decode(m, f).score);
    }
  }
  // With width 2 the greedy prefix can be displaced by two partials that
  // later collapse, so the greedy score is not a lower bound in general.
  bool counterexample = false;
  for (int trial = 0; trial < 400 && !counterexample; ++trial) {
    ModelConfig cfg = tiny_config(Arch::kFc, 8, 6, 8);
    Captioner m(cfg, trial);
    randomize(m, rng, 1.5);
    ImageFeatures f = random_features(cfg, rng);
    const double greedy = greedy_decode(m, f).score;
    counterexample = beam_search(m, f, {2, kInf, 0})[0].score < greedy;
  }
  CHECK(counterexample);
}

TEST_CASE("posterior averaging") {
  const std::vector<std::vector<double>> p = {{0.9, 0.1}, {0.1, 0.9}};
  const auto avg = average_posteriors(p);
  CHECK(avg[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(avg[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(argmax_token(avg) == 0);
  const std::vector<std::vector<double>> ragged = {{0.5, 0.5}, {1.0}};
  CHECK_THROWS_AS(average_posteriors(ragged), DimensionError);
}

TEST_CASE("an ensemble of copies decodes like its member") {
  Rng rng(9);
  for (Arch a : kArchs) {
    ModelConfig cfg = tiny_config(a);
    Captioner m(cfg, 70);
    randomize(m, rng, 0.8);
    Captioner copy(cfg, ParamStore(m.params()));
    ImageFeatures f = random_features(cfg, rng);
    Hypothesis single = greedy_decode(m, f);

    Hypothesis one = greedy_decode(Ensemble({&m}), f);
    CHECK(one.tokens == single.tokens);
    CHECK(one.score == single.score);

    Hypothesis three = greedy_decode(Ensemble({&m, &copy, &m}), f);
    CHECK(three.tokens == single.tokens);
    CHECK(three.score == doctest::Approx(single.score).epsilon(1e-12));

    auto b1 = beam_search(m, f, {3, kDefaultPruneMargin, 0});
    auto b3 = beam_search(Ensemble({&m, &copy, &m}), f, {3, kDefaultPruneMargin, 0});
    REQUIRE(b1.size() == b3.size());
    for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1[i].tokens == b3[i].tokens);
  }
}

TEST_CASE("ensembles of different architectures average their posteriors") {
  Rng rng(10);
  ModelConfig fc = tiny_config(Arch::kFc);
  ModelConfig att = tiny_config(Arch::kAtt2all);
  Captioner a(fc, 1), b(att, 2);
  randomize(a, rng, 0.8);
  randomize(b, rng, 0.8);
  ImageFeatures f = random_features(att, rng);
  Ensemble e({&a, &b});
  auto states = e.initial_states(f);
  const auto avg = e.step(states, kBos);
  StepResult ra = a.step(a.initial_state(f), kBos);
  StepResult rb = b.step(b.initial_state(f), kBos);
  softmax_inplace(ra.logits);
  softmax_inplace(rb.logits);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(avg[i] == doctest::Approx(0.5 * (ra.logits[i] + rb.logits[i])).epsilon(1e-14));
  }
  CHECK(states[0].h == ra.state.h);
  CHECK(states[1].h == rb.state.h);
}

TEST_CASE("ensemble and beam configuration errors") {
  Captioner a(tiny_config(Arch::kFc, 12), 1);
  Captioner b(tiny_config(Arch::kFc, 13), 1);
  Captioner c(tiny_config(Arch::kFc, 12, 8, 7), 1);
  CHECK_THROWS_AS(Ensemble({&a, &b}), UsageError);
  CHECK_THROWS_AS(Ensemble({&a, &c}), UsageError);
  CHECK_THROWS_AS(Ensemble({}), UsageError);
  Rng rng(11);
  ImageFeatures f = random_features(a.config(), rng);
  CHECK_THROWS_AS(beam_search(a, f, {0, 5.0, 0}), ConfigError);
  CHECK_THROWS_AS(beam_search(a, f, {2, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS(beam_search(a, f, {2, -1.0, 0}), ConfigError);
}

TEST_CASE("decode dispatches on width") {
  Rng rng(12);
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  Captioner m(cfg, 3);
  randomize(m, rng, 1.0);
  ImageFeatures f = random_features(cfg, rng);
  Ensemble e({&m});
  CHECK(decode(e, f, {1, kDefaultPruneMargin, 0}).tokens == greedy_decode(m, f).tokens);
  CHECK(decode(e, f, {4, kDefaultPruneMargin, 0}).tokens ==
        beam_search(m, f, {4, kDefaultPruneMargin, 0})[0].tokens);
  // A shorter horizon caps the output.
  CHECK(decode(e, f, {3, kDefaultPruneMargin, 2}).tokens.size() <= 2);
}

}  // namespace
}  // namespace scst
