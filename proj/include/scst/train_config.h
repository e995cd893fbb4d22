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

// Experiment configuration. Files are INI with [model], [xe] and [rl]
// sections plus top-level keys; every field has a default and any key can
// be overridden as "section.key=value".

#ifndef SCST_TRAIN_CONFIG_H_
#define SCST_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "scst/adam.h"
#include "scst/metrics.h"
#include "scst/model.h"
#include "scst/rl.h"

namespace scst {

struct XeConfig {
  int epochs = 20;
  std::size_t batch_size = 50;
  AdamConfig adam{};  // lr 5e-4, x0.8 every 3 epochs
  // Feedback probability rises by ss_increment every ss_period epochs.
  double ss_increment = 0.05;
  int ss_period = 5;
  double ss_max = 0.25;

  double feedback_prob(int epochs_completed) const;
};

struct RlConfig {
  int epochs = 10;
  std::size_t batch_size = 50;
  AdamConfig adam{5e-5, 0.9, 0.999, 1e-8, 0.8, 0};  // constant lr by default
  Estimator estimator = Estimator::kScst;
  MetricKind reward = MetricKind::kCiderD;
  // Metric used to pick the saved checkpoint on the validation split.
  MetricKind select_metric = MetricKind::kCiderD;
  std::size_t true_scst_lookahead = 1;
  double baseline_learning_rate = 1e-3;
  std::size_t mixer_initial = 1;
  std::size_t mixer_step = 1;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  // Architecture and sizes; vocab, feature_dim and num_locations are taken
  // from the dataset at train time.
  ModelConfig model{Arch::kAtt2in, 0, 64, 0, 0, 12};
  XeConfig xe{};
  RlConfig rl{};

  void validate() const;
};

// Parses `path` (empty path: defaults only) and then applies `overrides`,
// each "section.key=value". Unknown keys and malformed values are
// ConfigErrors.
TrainConfig load_train_config(const std::string& path,
                              const std::vector<std::string>& overrides = {});
// Round-trippable INI text for `cfg`.
std::string format_train_config(const TrainConfig& cfg);

}  // namespace scst

#endif  // SCST_TRAIN_CONFIG_H_
