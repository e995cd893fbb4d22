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

#ifndef SCST_RANDOM_H_
#define SCST_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace scst {

// Seeded generator with fully specified derived draws, so sampled rollouts
// are bit-reproducible for a given seed independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn from the probability vector `p` by inverse CDF.
  std::size_t categorical(std::span<const double> p);
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * n); }
  double normal();

  // A child generator whose stream depends only on (this seed state, key).
  Rng split(std::uint64_t key);

 private:
  std::mt19937_64 engine_;
};

}  // namespace scst

#endif  // SCST_RANDOM_H_
