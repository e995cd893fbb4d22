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

#ifndef SCST_ADAM_H_
#define SCST_ADAM_H_

#include "scst/param_store.h"

namespace scst {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Step decay: lr is multiplied by anneal_factor every anneal_period epochs.
  // anneal_period == 0 disables annealing.
  double anneal_factor = 0.8;
  int anneal_period = 3;

  // Learning rate in effect once `epochs_completed` epochs have run.
  double lr_at_epoch(int epochs_completed) const;
  // ConfigError unless 0 < lr and 0 < beta1, beta2 < 1.
  void validate() const;
};

// One bias-corrected ADAM update over every parameter in `store`, then
// zeroes the gradients and bumps the step counter. All gradients are checked
// before anything is written; a non-finite gradient throws NumericError
// naming the parameter and leaves the store untouched.
void adam_step(ParamStore& store, const AdamConfig& cfg);

}  // namespace scst

#endif  // SCST_ADAM_H_
