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

#include "doctest.h"
#include "model_fixtures.h"
#include "scst/error.h"
#include "scst/ops.h"
#include "scst/rollout.h"
#include "test_util.h"

namespace scst {
namespace {

using testing::numeric_gradient;
using testing::random_features;
using testing::random_reference;
using testing::randomize;
using testing::relative_error;
using testing::tiny_config;

constexpr Arch kArchs[] = {Arch::kFc, Arch::kAtt2in, Arch::kAtt2all};

void zero_all(Captioner& m) {
  for (std::size_t i = 0; i < m.params().size(); ++i) m.params().value(i).fill(0.0);
}

TEST_CASE("zero weights give zero logits and a uniform posterior") {
  for (Arch arch : kArchs) {
    Rng rng(1);
    ModelConfig cfg = tiny_config(arch);
    Captioner m(cfg, 7);
    zero_all(m);
    StepState s = m.initial_state(random_features(cfg, rng));
    StepCache cache;
    StepResult r = m.step(s, kBos, &cache);
    for (double v : r.logits) CHECK(v == 0.0);
    for (double p : cache.posterior) CHECK(p == doctest::Approx(1.0 / 12).epsilon(1e-15));
  }
}

TEST_CASE("initial hidden and cell states are zero") {
  Rng rng(2);
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  Captioner m(cfg, 3);
  StepState s = m.initial_state(random_features(cfg, rng));
  for (double v : s.h) CHECK(v == 0.0);
  for (double v : s.c) CHECK(v == 0.0);
  CHECK(s.t == 0);
}

TEST_CASE("fresh weights lie in the init range and biases are zero") {
  Captioner m(tiny_config(Arch::kAtt2all), 4);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    const Parameter& p = m.params().param(i);
    const bool bias = p.name == "lstm.b" || p.name == "att.ba" || p.name == "att.balpha";
    for (double v : p.value.data()) {
      if (bias) {
        CHECK(v == 0.0);
      } else {
        CHECK(std::abs(v) <= 0.08);
      }
    }
  }
}

// Analytic gradient of sum_t <weights_t, s_t> along a teacher-forced
// trajectory, against central differences for every parameter tensor.
void check_logit_gradients(Arch arch, std::size_t steps) {
  Rng rng(100 + static_cast<int>(arch));
  ModelConfig cfg = tiny_config(arch);
  Captioner m(cfg, 5);
  randomize(m, rng, 0.5);
  ImageFeatures feat = random_features(cfg, rng);
  std::vector<TokenId> ref = random_reference(steps, cfg.vocab_size, rng);
  std::vector<std::vector<double>> weights(steps, std::vector<double>(cfg.vocab_size, 1.0));

  auto loss = [&] {
    Rollout r = forced_rollout(m, feat, ref);
    double acc = 0.0;
    for (std::size_t t = 0; t < r.length(); ++t) {
      for (std::size_t k = 0; k < cfg.vocab_size; ++k) acc += weights[t][k] * r.logits(t)[k];
    }
    return acc;
  };
  Rollout r = forced_rollout(m, feat, ref);
  GradSet g = m.params().make_grad_buffer();
  backprop_through_time(m, r, weights, g);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    INFO(arch_name(arch), " ", m.params().param(i).name);
    auto numeric = numeric_gradient(m.params().value(i), loss);
    CHECK(relative_error(g[i].values(), numeric) < 1e-6);
  }
}

TEST_CASE("single-step gradient of sum(s_t) matches finite differences") {
  for (Arch arch : kArchs) check_logit_gradients(arch, 1);
}

TEST_CASE("multi-step logit gradients match finite differences") {
  for (Arch arch : kArchs) check_logit_gradients(arch, 4);
}

TEST_CASE("BPTT of the cross-entropy gradient matches finite differences of the XE loss") {
  for (Arch arch : kArchs) {
    Rng rng(300 + static_cast<int>(arch));
    ModelConfig cfg = tiny_config(arch, 12, 8, 6);
    Captioner m(cfg, 9);
    randomize(m, rng, 0.3);
    ImageFeatures feat = random_features(cfg, rng);
    std::vector<TokenId> ref = random_reference(6, cfg.vocab_size, rng);
    auto loss = [&] { return xe_loss(forced_rollout(m, feat, ref)); };
    Rollout r = forced_rollout(m, feat, ref);
    GradSet g = m.params().make_grad_buffer();
    backprop_through_time(m, r, xe_logits_grad(r), g);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      INFO(arch_name(arch), " ", m.params().param(i).name);
      CHECK(relative_error(g[i].values(), numeric_gradient(m.params().value(i), loss)) < 1e-5);
    }
  }
}

TEST_CASE("identical location features make the attended feature equal to them") {
  for (Arch arch : {Arch::kAtt2in, Arch::kAtt2all}) {
    Rng rng(4);
    ModelConfig cfg = tiny_config(arch);
    Captioner m(cfg, 6);
    randomize(m, rng, 0.5);
    ImageFeatures f = random_features(cfg, rng);
    for (std::size_t i = 1; i < cfg.num_locations; ++i) {
      for (std::size_t k = 0; k < cfg.feature_dim; ++k) f.spatial.at(i, k) = f.spatial.at(0, k);
    }
    StepState s = m.initial_state(f);
    StepCache cache;
    m.step(s, kBos, &cache);
    for (std::size_t k = 0; k < cfg.feature_dim; ++k) {
      CHECK(cache.attended[k] == doctest::Approx(f.spatial.at(0, k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("equal attention scores give uniform weights") {
  Rng rng(8);
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  Captioner m(cfg, 6);
  randomize(m, rng, 0.5);
  // W_aI = 0 makes every location's score w . tanh(W_ah h + b_a).
  m.params().value("att.wai").fill(0.0);
  m.params().value("att.balpha").fill(0.0);
  StepState s = m.initial_state(random_features(cfg, rng));
  for (int t = 0; t < 3; ++t) {
    StepCache cache;
    StepResult r = m.step(s, 4, &cache);
    for (double a : cache.alpha) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-14));
    s = r.state;
  }
}

TEST_CASE("attention weights are invariant to a constant shift of the scores") {
  Rng rng(12);
  ModelConfig cfg = tiny_config(Arch::kAtt2all);
  Captioner m(cfg, 6);
  randomize(m, rng, 0.5);
  ImageFeatures f = random_features(cfg, rng);
  StepCache a, b;
  m.step(m.initial_state(f), kBos, &a);
  for (double& v : m.params().value("att.balpha").data()) v += 3.7;
  m.step(m.initial_state(f), kBos, &b);
  for (std::size_t i = 0; i < cfg.num_locations; ++i) {
    CHECK(a.alpha[i] == doctest::Approx(b.alpha[i]).epsilon(1e-13));
  }
}

TEST_CASE("attention weights sum to one every step") {
  for (Arch arch : {Arch::kAtt2in, Arch::kAtt2all}) {
    Rng rng(13);
    ModelConfig cfg = tiny_config(arch);
    Captioner m(cfg, 6);
    randomize(m, rng, 1.0);
    RolloutOptions opt;
    opt.mode = RolloutMode::kSampled;
    Rollout r = rollout(m, random_features(cfg, rng), opt, &rng);
    for (const StepCache& k : r.trace) {
      double s = 0.0;
      for (double a : k.alpha) s += a;
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

void copy_shared(const Captioner& from, Captioner& to) {
  for (std::size_t i = 0; i < to.params().size(); ++i) {
    const std::string& name = to.params().param(i).name;
    if (from.params().contains(name)) to.params().value(i) = from.params().value(name);
  }
}

TEST_CASE("Att2all without image couplings reduces to an FC-style word step") {
  Rng rng(21);
  ModelConfig all_cfg = tiny_config(Arch::kAtt2all);
  ModelConfig fc_cfg = tiny_config(Arch::kFc);
  Captioner all(all_cfg, 1);
  randomize(all, rng, 0.5);
  all.params().value("lstm.wzi").fill(0.0);
  all.params().value("lstm.wgi").fill(0.0);
  all.params().value("out.wsi").fill(0.0);
  Captioner fc(fc_cfg, 2);
  copy_shared(all, fc);

  ImageFeatures f = random_features(all_cfg, rng);
  StepState sa = all.initial_state(f);
  StepState sf = fc.initial_state(f);
  sf.t = 1;  // past the image step: FC consumes embedded words from here on
  TokenId prev = kBos;
  for (int t = 0; t < 4; ++t) {
    StepResult ra = all.step(sa, prev);
    StepResult rf = fc.step(sf, prev);
    for (std::size_t k = 0; k < ra.logits.size(); ++k) {
      CHECK(ra.logits[k] == doctest::Approx(rf.logits[k]).epsilon(1e-14));
    }
    sa = ra.state;
    sf = rf.state;
    prev = static_cast<TokenId>(3 + t);
  }
}

TEST_CASE("Att2all with zero gate and output couplings equals Att2in") {
  Rng rng(22);
  Captioner all(tiny_config(Arch::kAtt2all), 1);
  randomize(all, rng, 0.5);
  all.params().value("lstm.wgi").fill(0.0);
  all.params().value("out.wsi").fill(0.0);
  Captioner in(tiny_config(Arch::kAtt2in), 2);
  copy_shared(all, in);
  ImageFeatures f = random_features(all.config(), rng);
  RolloutOptions opt;
  opt.mode = RolloutMode::kGreedy;
  Rollout ra = rollout(all, f, opt);
  Rollout ri = rollout(in, f, opt);
  REQUIRE(ra.tokens == ri.tokens);
  for (std::size_t t = 0; t < ra.length(); ++t) {
    for (std::size_t k = 0; k < all.config().vocab_size; ++k) {
      CHECK(ra.logits(t)[k] == doctest::Approx(ri.logits(t)[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("configuration and input errors") {
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  cfg.num_locations = 0;
  CHECK_THROWS_AS(Captioner(cfg, 1), ConfigError);
  cfg = tiny_config(Arch::kFc);
  cfg.vocab_size = 2;
  CHECK_THROWS_AS(Captioner(cfg, 1), ConfigError);

  Rng rng(3);
  cfg = tiny_config(Arch::kFc);
  Captioner m(cfg, 1);
  StepState s = m.initial_state(random_features(cfg, rng));
  StepResult first = m.step(s, kBos);
  CHECK_THROWS_AS(m.step(first.state, 12), InputError);
  CHECK_THROWS_AS(m.step(first.state, -1), InputError);

  ImageFeatures bad;
  bad.global = Tensor({cfg.feature_dim + 1});
  CHECK_THROWS_AS(m.initial_state(bad), DimensionError);
}

TEST_CASE("teacher rollout requires references") {
  Rng rng(4);
  ModelConfig cfg = tiny_config(Arch::kFc);
  Captioner m(cfg, 1);
  RolloutOptions opt;
  opt.mode = RolloutMode::kTeacher;
  CHECK_THROWS_AS(rollout(m, random_features(cfg, rng), opt), UsageError);
  opt.mode = RolloutMode::kSampled;
  CHECK_THROWS_AS(rollout(m, random_features(cfg, rng), opt, nullptr), UsageError);
}

TEST_CASE("scheduled sampling with p = 0 is teacher forcing") {
  Rng rng(5);
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  Captioner m(cfg, 1);
  randomize(m, rng, 0.5);
  ImageFeatures f = random_features(cfg, rng);
  std::vector<TokenId> ref = random_reference(5, cfg.vocab_size, rng);
  RolloutOptions teacher;
  teacher.mode = RolloutMode::kTeacher;
  teacher.reference = &ref;
  RolloutOptions sched = teacher;
  sched.mode = RolloutMode::kScheduled;
  sched.feedback_prob = 0.0;
  Rng srng(99);
  Rollout a = rollout(m, f, teacher);
  Rollout b = rollout(m, f, sched, &srng);
  CHECK(a.tokens == b.tokens);
  CHECK(a.inputs == b.inputs);
  CHECK(a.logprobs == b.logprobs);
}

TEST_CASE("scheduled sampling with p = 1 feeds back samples") {
  Rng rng(6);
  ModelConfig cfg = tiny_config(Arch::kFc);
  Captioner m(cfg, 1);
  randomize(m, rng, 1.0);
  ImageFeatures f = random_features(cfg, rng);
  std::vector<TokenId> ref = random_reference(6, cfg.vocab_size, rng);
  RolloutOptions sched;
  sched.mode = RolloutMode::kScheduled;
  sched.reference = &ref;
  sched.feedback_prob = 1.0;
  int differing = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rollout r = rollout(m, f, sched, &rng);
    CHECK(r.tokens == ref);
    for (std::size_t t = 1; t < r.length(); ++t) differing += r.inputs[t] != ref[t - 1];
  }
  CHECK(differing > 0);
}

TEST_CASE("greedy rollouts are deterministic and sampled rollouts reproducible") {
  for (Arch arch : kArchs) {
    Rng rng(7);
    ModelConfig cfg = tiny_config(arch);
    Captioner m(cfg, 1);
    randomize(m, rng, 1.0);
    ImageFeatures f = random_features(cfg, rng);
    RolloutOptions g;
    Rollout a = rollout(m, f, g);
    Rollout b = rollout(m, f, g);
    CHECK(a.tokens == b.tokens);
    CHECK(a.logprobs == b.logprobs);

    RolloutOptions s;
    s.mode = RolloutMode::kSampled;
    Rng r1(1234), r2(1234);
    Rollout x = rollout(m, f, s, &r1);
    Rollout y = rollout(m, f, s, &r2);
    CHECK(x.tokens == y.tokens);
    CHECK(x.logprobs == y.logprobs);
  }
}

TEST_CASE("rollouts terminate at first EOS or T and record valid posteriors") {
  Rng rng(8);
  for (Arch arch : kArchs) {
    ModelConfig cfg = tiny_config(arch);
    Captioner m(cfg, 2);
    randomize(m, rng, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      RolloutOptions s;
      s.mode = RolloutMode::kSampled;
      Rollout r = rollout(m, random_features(cfg, rng), s, &rng);
      CHECK(r.length() >= 1);
      CHECK(r.length() <= cfg.max_len);
      for (std::size_t t = 0; t + 1 < r.length(); ++t) CHECK(r.tokens[t] != kEos);
      CHECK(r.ended_with_eos == (r.tokens.back() == kEos));
      if (!r.ended_with_eos) CHECK(r.length() == cfg.max_len);
      for (std::size_t t = 0; t < r.length(); ++t) {
        CHECK(r.logprobs[t] <= 0.0);
        double sum = 0.0;
        for (double p : r.posterior(t)) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("mixed rollout keeps the ground-truth prefix") {
  Rng rng(9);
  ModelConfig cfg = tiny_config(Arch::kFc);
  Captioner m(cfg, 1);
  randomize(m, rng, 1.0);
  std::vector<TokenId> ref = random_reference(5, cfg.vocab_size, rng);
  RolloutOptions opt;
  opt.mode = RolloutMode::kMixed;
  opt.reference = &ref;
  opt.teacher_prefix = 2;
  Rollout r = rollout(m, random_features(cfg, rng), opt, &rng);
  REQUIRE(r.length() >= 3);
  CHECK(r.tokens[0] == ref[0]);
  CHECK(r.tokens[1] == ref[1]);
  CHECK(r.inputs[2] == ref[1]);
}

TEST_CASE("BPTT contracts") {
  Rng rng(10);
  ModelConfig cfg = tiny_config(Arch::kAtt2all);
  Captioner m(cfg, 1);
  randomize(m, rng, 0.5);
  std::vector<TokenId> ref = random_reference(4, cfg.vocab_size, rng);
  Rollout r = forced_rollout(m, random_features(cfg, rng), ref);

  GradSet g = m.params().make_grad_buffer();
  std::vector<std::vector<double>> zeros(r.length(), std::vector<double>(cfg.vocab_size, 0.0));
  backprop_through_time(m, r, zeros, g);
  CHECK(g.squared_norm() == 0.0);

  zeros.pop_back();
  CHECK_THROWS_AS(backprop_through_time(m, r, zeros, g), UsageError);
}

TEST_CASE("gradient accumulation is additive") {
  Rng rng(11);
  ModelConfig cfg = tiny_config(Arch::kAtt2in);
  Captioner m(cfg, 1);
  randomize(m, rng, 0.5);
  std::vector<TokenId> ref = random_reference(4, cfg.vocab_size, rng);
  Rollout r = forced_rollout(m, random_features(cfg, rng), ref);
  GradSet once = m.params().make_grad_buffer();
  GradSet twice = m.params().make_grad_buffer();
  backprop_through_time(m, r, xe_logits_grad(r), once);
  backprop_through_time(m, r, xe_logits_grad(r), twice);
  backprop_through_time(m, r, xe_logits_grad(r), twice);
  once.scale(2.0);
  CHECK(relative_error(once.flatten(), twice.flatten()) < 1e-15);
}

TEST_CASE("model checkpoint round trip") {
  ModelConfig cfg = tiny_config(Arch::kAtt2all);
  Captioner m(cfg, 17);
  const std::string bytes = m.serialize();
  const std::string path = "models_test_ckpt.bin";
  m.save(path);
  Captioner loaded = Captioner::load(path);
  CHECK(loaded.config() == cfg);
  CHECK(loaded.serialize() == bytes);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace scst
