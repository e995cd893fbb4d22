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

#include "scst/adam.h"

#include <cmath>

#include "scst/error.h"

namespace scst {

double AdamConfig::lr_at_epoch(int epochs_completed) const {
  if (anneal_period <= 0 || epochs_completed <= 0) return learning_rate;
  return learning_rate * std::pow(anneal_factor, epochs_completed / anneal_period);
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
  if (!(anneal_factor > 0.0)) throw ConfigError("adam: anneal factor must be positive");
}

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  cfg.validate();
  GradSet& grads = store.grads();
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!grads[i].all_finite()) {
      throw NumericError("adam: non-finite gradient for parameter " + store.param(i).name);
    }
  }
  const double t = static_cast<double>(store.step() + 1);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store.param(i);
    auto g = grads[i].data();
    auto w = p.value.data();
    auto m = p.adam_m.data();
    auto v = p.adam_v.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
  grads.zero();
  store.set_step(store.step() + 1);
}

}  // namespace scst
