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

// Training recipes: cross-entropy pretraining with scheduled sampling and
// policy-gradient fine-tuning with any estimator. Both log one CSV row per
// epoch (epoch 0 is the starting model) and keep the checkpoint with the
// best validation score.

#ifndef SCST_TRAINER_H_
#define SCST_TRAINER_H_

#include <string>
#include <vector>

#include "scst/dataset.h"
#include "scst/model.h"
#include "scst/train_config.h"

namespace scst {

// Model config for `cfg` sized to `data`.
ModelConfig model_config_for(const TrainConfig& cfg, const Dataset& data);

struct XeEpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double feedback_prob = 0.0;
  double train_loss = 0.0;  // mean per-sentence loss over the epoch
  double val_loss = 0.0;    // teacher-forced, mean over all references
  double val_cider = 0.0;   // greedy
};

struct XeResult {
  std::string checkpoint;
  int best_epoch = 0;
  double best_val_cider = 0.0;
  std::vector<XeEpochLog> log;
};

// Writes xe_best.ckpt and xe_log.csv into out_dir. A non-finite loss aborts
// with a NumericError naming the epoch.
XeResult train_xe(const TrainConfig& cfg, const Dataset& data, const std::string& out_dir);

// Mean teacher-forced loss over every reference of every example.
double xe_validation_loss(const Captioner& model, const Split& split);

struct RlEpochLog {
  int epoch = 0;
  double grad_variance_mean = 0.0;
  double grad_variance_std = 0.0;
  double posterior_entropy_mean = 0.0;
  double greedy_cider = 0.0;
  double sampled_reward_mean = 0.0;
  double val_selected = 0.0;  // validation score under cfg.rl.select_metric
};

struct RlResult {
  std::string checkpoint;
  int best_epoch = 0;
  double best_val = 0.0;
  std::vector<RlEpochLog> log;
};

// Fine-tunes a copy of `init` (fresh optimiser state). Writes rl_best.ckpt
// and rl_diagnostics.csv into out_dir.
RlResult train_rl(const TrainConfig& cfg, const Dataset& data, const Captioner& init,
                  const std::string& out_dir);

}  // namespace scst

#endif  // SCST_TRAINER_H_
