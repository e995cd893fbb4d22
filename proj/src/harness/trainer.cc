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

#include "scst/trainer.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "scst/error.h"
#include "scst/evaluation.h"
#include "scst/parallel.h"
#include "scst/rl.h"
#include "scst/rollout.h"

namespace scst {
namespace {

namespace fs = std::filesystem;

// Stream tags keep the XE, RL and shuffling randomness disjoint.
enum : std::uint64_t { kShuffleStream = 1, kXeStream = 2, kRlStream = 3, kInitStream = 4 };

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

// Per-example gradient buffers, reused across batches and summed in
// example order.
class GradBuffers {
 public:
  GradBuffers(const ParamStore& store, std::size_t n) : bufs_(n, store.make_grad_buffer()) {}
  GradSet& operator[](std::size_t i) { return bufs_[i]; }
  void reduce_into(ParamStore& store, std::size_t used) {
    GradSet& g = store.grads();
    g.zero();
    for (std::size_t i = 0; i < used; ++i) g.add(bufs_[i]);
    g.scale(1.0 / static_cast<double>(used));
    for (std::size_t i = 0; i < used; ++i) bufs_[i].zero();
  }

 private:
  std::vector<GradSet> bufs_;
};

void reset_optimizer(ParamStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    store.param(i).adam_m.fill(0.0);
    store.param(i).adam_v.fill(0.0);
  }
  store.grads().zero();
  store.set_step(0);
}

}  // namespace

ModelConfig model_config_for(const TrainConfig& cfg, const Dataset& data) {
  ModelConfig m = cfg.model;
  m.vocab_size = data.vocab.size();
  m.feature_dim = data.feature_dim();
  m.num_locations = data.num_locations();
  m.validate();
  return m;
}

double xe_validation_loss(const Captioner& model, const Split& split) {
  std::vector<double> per(split.size());
  parallel_for(split.size(), [&](std::size_t i) {
    const Example& e = split.examples[i];
    double acc = 0.0;
    for (const Sentence& ref : e.references) {
      acc += xe_loss(rollout(model, e.features, {RolloutMode::kTeacher, &ref}));
    }
    per[i] = acc / static_cast<double>(e.references.size());
  });
  double total = 0.0;
  for (double v : per) total += v;
  return total / static_cast<double>(split.size());
}

XeResult train_xe(const TrainConfig& cfg, const Dataset& data, const std::string& out_dir) {
  cfg.validate();
  prepare_dir(out_dir);
  Captioner model(model_config_for(cfg, data), stream_seed(cfg.seed, kInitStream));
  const Split& train = data.train;
  const std::size_t B = cfg.xe.batch_size;
  GradBuffers buffers(model.params(), B);
  std::vector<double> losses(B);

  XeResult result;
  result.checkpoint = (fs::path(out_dir) / "xe_best.ckpt").string();
  auto validate = [&](XeEpochLog& row) {
    row.val_loss = xe_validation_loss(model, data.val);
    row.val_cider = greedy_score(model, data.val, MetricKind::kCiderD);
    if (row.epoch == 0 || row.val_cider > result.best_val_cider) {
      result.best_val_cider = row.val_cider;
      result.best_epoch = row.epoch;
      model.save(result.checkpoint);
    }
    result.log.push_back(row);
  };
  XeEpochLog start;
  validate(start);

  for (int epoch = 1; epoch <= cfg.xe.epochs; ++epoch) {
    try {
      const int done = epoch - 1;
      AdamConfig adam = cfg.xe.adam;
      adam.learning_rate = cfg.xe.adam.lr_at_epoch(done);
      const double p = cfg.xe.feedback_prob(done);
      const auto order = shuffled(train.size(), stream_seed(cfg.seed, kShuffleStream, epoch));
      double loss_sum = 0.0;
      for (std::size_t start_i = 0; start_i < order.size(); start_i += B) {
        const std::size_t n = std::min(B, order.size() - start_i);
        parallel_for(n, [&](std::size_t k) {
          const std::size_t idx = order[start_i + k];
          const Example& e = train.examples[idx];
          Rng rng(stream_seed(cfg.seed, kXeStream, (static_cast<std::uint64_t>(epoch) << 32) | idx));
          const Sentence& ref = e.references[rng.below(e.references.size())];
          RolloutOptions opt{RolloutMode::kScheduled, &ref, p};
          const Rollout r = rollout(model, e.features, opt, &rng);
          losses[k] = xe_loss(r);
          backprop_through_time(model, r, xe_logits_grad(r), buffers[k]);
        });
        for (std::size_t k = 0; k < n; ++k) loss_sum += losses[k];
        if (!std::isfinite(loss_sum)) {
          throw NumericError("non-finite loss");
        }
        buffers.reduce_into(model.params(), n);
        adam_step(model.params(), adam);
      }
      XeEpochLog row;
      row.epoch = epoch;
      row.learning_rate = adam.learning_rate;
      row.feedback_prob = p;
      row.train_loss = loss_sum / static_cast<double>(train.size());
      validate(row);
    } catch (const NumericError& e) {
      throw NumericError(std::string("XE training diverged in epoch ") +
                         std::to_string(epoch) + ": " + e.what());
    }
  }

  std::ofstream csv = open_out((fs::path(out_dir) / "xe_log.csv").string());
  csv << "epoch,learning_rate,feedback_prob,train_loss,val_loss,val_cider\n";
  for (const XeEpochLog& r : result.log) {
    csv << r.epoch << ',' << num(r.learning_rate) << ',' << num(r.feedback_prob) << ','
        << num(r.train_loss) << ',' << num(r.val_loss) << ',' << num(r.val_cider) << '\n';
  }
  if (!csv) throw IoError("failed writing xe_log.csv");
  return result;
}

RlResult train_rl(const TrainConfig& cfg, const Dataset& data, const Captioner& init,
                  const std::string& out_dir) {
  cfg.validate();
  prepare_dir(out_dir);
  const ModelConfig mc = init.config();
  if (mc.vocab_size != data.vocab.size()) {
    throw ConfigError("checkpoint vocab " + std::to_string(mc.vocab_size) +
                      " does not match dataset vocab " + std::to_string(data.vocab.size()));
  }
  Captioner model(mc, ParamStore(init.params()));
  reset_optimizer(model.params());

  const RlConfig& rc = cfg.rl;
  const Split& train = data.train;
  const std::vector<References> train_refs = train.references();
  const NGramStats stats = NGramStats::build(train_refs);
  AdamConfig bl_adam;
  bl_adam.learning_rate = rc.baseline_learning_rate;
  bl_adam.anneal_period = 0;
  LearnedBaseline baseline(mc.hidden, bl_adam);
  const MixerSchedule schedule{rc.mixer_initial, rc.mixer_step, mc.max_len};
  const bool uses_baseline =
      rc.estimator == Estimator::kLearnedBaseline || rc.estimator == Estimator::kMixer;

  const std::size_t B = rc.batch_size;
  GradBuffers buffers(model.params(), B);
  EpisodeBatch batch(B);

  RlResult result;
  result.checkpoint = (fs::path(out_dir) / "rl_best.ckpt").string();
  auto validate = [&](RlEpochLog& row) {
    const EvalSummary s =
        score_split(tokens_of(decode_split(Ensemble({&model}), data.val, BeamConfig{})), data.val);
    row.greedy_cider = s.cider.corpus_score;
    row.val_selected = summary_value(s, rc.select_metric);
    if (row.epoch == 0 || row.val_selected > result.best_val) {
      result.best_val = row.val_selected;
      result.best_epoch = row.epoch;
      model.save(result.checkpoint);
    }
    result.log.push_back(row);
  };
  RlEpochLog start;
  validate(start);

  for (int epoch = 1; epoch <= rc.epochs; ++epoch) {
    try {
      AdamConfig adam = rc.adam;
      adam.learning_rate = rc.adam.lr_at_epoch(epoch - 1);
      const auto order = shuffled(train.size(), stream_seed(cfg.seed, kShuffleStream, 1000 + epoch));
      std::vector<double> variances;
      double entropy_sum = 0.0, reward_sum = 0.0;
      for (std::size_t start_i = 0; start_i < order.size(); start_i += B) {
        const std::size_t n = std::min(B, order.size() - start_i);
        parallel_for(n, [&](std::size_t k) {
          const std::size_t idx = order[start_i + k];
          const Example& e = train.examples[idx];
          Rng rng(stream_seed(cfg.seed, kRlStream, (static_cast<std::uint64_t>(epoch) << 32) | idx));
          const SequenceReward reward = [&](std::span<const TokenId> s) {
            return sentence_reward(rc.reward, s, e.references, stats);
          };
          Episode& ep = batch[k];
          ep = Episode{};
          if (rc.estimator == Estimator::kMixer) {
            const Sentence& ref = e.references[rng.below(e.references.size())];
            ep = mixer_episode(model, e.features, ref, schedule.boundary(epoch - 1, ref.size()),
                               rng, reward, baseline);
          } else {
            ep.sample = rollout(model, e.features, {RolloutMode::kSampled}, &rng);
            switch (rc.estimator) {
              case Estimator::kReinforce: reinforce_grad(ep, reward, 0.0); break;
              case Estimator::kLearnedBaseline: learned_baseline_grad(ep, reward, baseline); break;
              case Estimator::kScst:
                ep.greedy = rollout(model, e.features, {});
                scst_grad(ep, reward);
                break;
              case Estimator::kTdScst: td_scst_grad(ep, model, reward); break;
              case Estimator::kTrueScst:
                true_scst_grad(ep, model, reward, rc.true_scst_lookahead);
                break;
              case Estimator::kMixer: break;
            }
          }
          backprop_through_time(model, ep.sample, ep.grads, buffers[k]);
        });
        const std::span<const Episode> used(batch.data(), n);
        const EstimatorDiagnostics d = estimator_diagnostics(used, mc.max_len, mc.vocab_size);
        variances.push_back(d.grad_variance);
        entropy_sum += d.posterior_entropy * static_cast<double>(n);
        for (const Episode& ep : used) reward_sum += ep.reward;
        if (uses_baseline) baseline.update(used);
        buffers.reduce_into(model.params(), n);
        adam_step(model.params(), adam);
      }
      RlEpochLog row;
      row.epoch = epoch;
      double mean = 0.0, sq = 0.0;
      for (double v : variances) mean += v;
      mean /= static_cast<double>(variances.size());
      for (double v : variances) sq += (v - mean) * (v - mean);
      row.grad_variance_mean = mean;
      row.grad_variance_std = std::sqrt(sq / static_cast<double>(variances.size()));
      row.posterior_entropy_mean = entropy_sum / static_cast<double>(train.size());
      row.sampled_reward_mean = reward_sum / static_cast<double>(train.size());
      if (!std::isfinite(row.sampled_reward_mean) || !std::isfinite(mean)) {
        throw NumericError("non-finite reward or gradient variance");
      }
      validate(row);
    } catch (const NumericError& e) {
      throw NumericError(std::string("RL training diverged in epoch ") +
                         std::to_string(epoch) + ": " + e.what());
    }
  }

  std::ofstream csv = open_out((fs::path(out_dir) / "rl_diagnostics.csv").string());
  csv << "epoch,estimator,grad_variance_mean,grad_variance_std,posterior_entropy_mean,"
         "greedy_cider,sampled_reward_mean,val_"
      << metric_name(rc.select_metric) << '\n';
  for (const RlEpochLog& r : result.log) {
    csv << r.epoch << ',' << estimator_name(rc.estimator) << ',';
    if (r.epoch == 0) {
      csv << ",,,";
    } else {
      csv << num(r.grad_variance_mean) << ',' << num(r.grad_variance_std) << ','
          << num(r.posterior_entropy_mean) << ',';
    }
    csv << num(r.greedy_cider) << ',';
    csv << (r.epoch == 0 ? "" : num(r.sampled_reward_mean)) << ',' << num(r.val_selected)
        << '\n';
  }
  if (!csv) throw IoError("failed writing rl_diagnostics.csv");
  return result;
}

}  // namespace scst
