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

// Hand-built and random token corpora for metric tests.

#ifndef SCST_TESTS_CORPUS_FIXTURES_H_
#define SCST_TESTS_CORPUS_FIXTURES_H_

#include <vector>

#include "metric_oracle.h"
#include "scst/metrics.h"
#include "scst/random.h"

namespace scst::testing {

// Word ids used by the fragment corpus.
enum : TokenId {
  kA = 3, kDog, kWith, kBall, kFrisbee, kStick, kCat, kHat, kRuns, kOn, kGrass, kMan, kBike,
  kThe, kPlays, kRed, kBone, kRope
};

// Five images. The first one's references agree on "a dog with a" and
// disagree on the final object, which is the setup where the truncated
// fragment "a dog with a" out-scores a complete caption unless EOS is
// scored as a word.
inline std::vector<References> fragment_corpus() {
  return {
      {{kA, kDog, kWith, kA, kBall, kEos},
       {kA, kDog, kWith, kA, kFrisbee, kEos},
       {kA, kDog, kWith, kA, kStick, kEos},
       {kA, kDog, kWith, kA, kBone, kEos},
       {kA, kDog, kWith, kA, kRope, kEos}},
      {{kA, kCat, kWith, kA, kHat, kEos},
       {kThe, kCat, kWith, kA, kRed, kHat, kEos},
       {kA, kCat, kOn, kThe, kGrass, kEos}},
      {{kA, kMan, kWith, kA, kBike, kEos},
       {kA, kMan, kRuns, kWith, kA, kDog, kEos},
       {kThe, kMan, kOn, kA, kBike, kEos}},
      {{kA, kDog, kRuns, kOn, kThe, kGrass, kEos},
       {kThe, kDog, kRuns, kEos},
       {kA, kRed, kDog, kRuns, kOn, kGrass, kEos}},
      {{kA, kMan, kPlays, kWith, kA, kBall, kEos},
       {kA, kMan, kWith, kA, kRed, kBall, kEos}},
  };
}

inline Sentence fragment_candidate() { return {kA, kDog, kWith, kA, kEos}; }
inline Sentence complete_candidate() { return {kA, kDog, kWith, kA, kBall, kEos}; }

struct RandomCorpus {
  std::vector<Sentence> candidates;
  std::vector<References> references;
};

// `images` images with 1..4 references of 1..8 words (plus EOS) over a
// six-word vocabulary, so n-gram overlaps are common. Some candidates copy
// a reference, some are empty, the rest are random.
inline RandomCorpus random_corpus(Rng& rng, std::size_t images = 5) {
  auto sentence = [&](std::size_t max_words) {
    Sentence s;
    const std::size_t len = 1 + rng.below(max_words);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<TokenId>(3 + rng.below(6)));
    s.push_back(kEos);
    return s;
  };
  RandomCorpus c;
  for (std::size_t i = 0; i < images; ++i) {
    References refs;
    const std::size_t n = 1 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k) refs.push_back(sentence(8));
    const double u = rng.uniform();
    if (u < 0.25) {
      c.candidates.push_back(refs[rng.below(refs.size())]);
    } else if (u < 0.3) {
      c.candidates.push_back({});
    } else {
      c.candidates.push_back(sentence(9));
    }
    c.references.push_back(std::move(refs));
  }
  return c;
}

// Adapters from library sentences to the oracle's plain word lists.
inline oracle::Words oracle_words(const Sentence& s) { return {s.begin(), s.end()}; }

inline oracle::Refs oracle_refs(const References& r) {
  oracle::Refs out;
  for (const Sentence& s : r) out.push_back(oracle_words(s));
  return out;
}

inline std::vector<oracle::Refs> oracle_corpus(const std::vector<References>& c) {
  std::vector<oracle::Refs> out;
  for (const References& r : c) out.push_back(oracle_refs(r));
  return out;
}

}  // namespace scst::testing

#endif  // SCST_TESTS_CORPUS_FIXTURES_H_
