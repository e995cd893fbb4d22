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

// Exhaustive sequence enumeration for models with tiny vocabularies.

#ifndef SCST_TESTS_ENUMERATION_H_
#define SCST_TESTS_ENUMERATION_H_

#include <functional>
#include <vector>

#include "scst/model.h"
#include "scst/rollout.h"

namespace scst::testing {

// Every sequence a decoder can emit: words from the full vocabulary,
// stopping at the first EOS or after max_len words.
inline std::vector<std::vector<TokenId>> all_sequences(std::size_t vocab, std::size_t max_len) {
  std::vector<std::vector<TokenId>> out;
  std::vector<TokenId> cur;
  std::function<void()> grow = [&] {
    for (std::size_t w = 0; w < vocab; ++w) {
      cur.push_back(static_cast<TokenId>(w));
      if (w == static_cast<std::size_t>(kEos) || cur.size() == max_len) {
        out.push_back(cur);
      } else {
        grow();
      }
      cur.pop_back();
    }
  };
  grow();
  return out;
}

inline double sequence_logprob(const Captioner& model, const ImageFeatures& f,
                               const std::vector<TokenId>& seq) {
  return forced_rollout(model, f, seq).total_logprob();
}

}  // namespace scst::testing

#endif  // SCST_TESTS_ENUMERATION_H_
