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

// Deterministic fan-out over example indices.

#ifndef SCST_PARALLEL_H_
#define SCST_PARALLEL_H_

#include <cstddef>
#include <cstdint>
#include <functional>

namespace scst {

inline constexpr const char* kThreadsEnvVar = "SCST_THREADS";

// Worker count from SCST_THREADS; 1 when unset. A value that is not a
// positive integer is a ConfigError.
std::size_t thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once, so callers that write to slot i and reduce slots in
// index order get results independent of the thread count. If any call
// throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = thread_count());

// Seed for an independent random stream keyed by (seed, a, b).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace scst

#endif  // SCST_PARALLEL_H_
