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

// Synthetic captioning data: toy scenes rendered to feature vectors and
// described by a small synonym grammar, plus the vocabulary and the JSONL
// split files the trainers read.

#ifndef SCST_DATASET_H_
#define SCST_DATASET_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scst/metrics.h"
#include "scst/model.h"

namespace scst {

inline constexpr const char* kBosWord = "<bos>";
inline constexpr const char* kEosWord = "<eos>";
inline constexpr const char* kUnkWord = "<unk>";

class Vocab {
 public:
  // Ids 0..2 are BOS, EOS, UNK; words with count >= min_count follow in
  // lexicographic order. Everything else maps to UNK.
  static Vocab build(const std::vector<std::vector<std::string>>& sentences, int min_count);
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t size() const { return words_.size(); }
  TokenId id(const std::string& word) const;
  const std::string& word(TokenId id) const;
  std::int64_t count(TokenId id) const { return counts_.at(static_cast<std::size_t>(id)); }

  // Whitespace-tokenised sentence plus a trailing EOS.
  std::vector<TokenId> encode(const std::string& sentence) const;
  // Words up to the first EOS, space separated.
  std::string decode(std::span<const TokenId> tokens) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::map<std::string, TokenId> index_;
};

std::vector<std::string> split_words(const std::string& sentence);

struct Example {
  std::string id;
  ImageFeatures features;
  std::vector<std::string> captions;
  References references;  // encoded captions, each ending in EOS
};

struct Split {
  std::string name;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  std::vector<References> references() const;
};

// Reads one JSONL split file, encoding captions with `vocab`.
Split load_split(const std::string& path, const Vocab& vocab);

struct Dataset {
  Vocab vocab;
  Split train, val, test;

  std::size_t feature_dim() const;
  std::size_t num_locations() const;
  const Split& split(const std::string& name) const;
  // Expects train.jsonl, val.jsonl, test.jsonl and vocab.tsv in `dir`.
  static Dataset load(const std::string& dir);
};

struct DataGenConfig {
  std::uint64_t seed = 0;
  std::size_t n_train = 2000;
  std::size_t n_val = 200;
  std::size_t n_test = 200;
  std::size_t feature_dim = 32;
  std::size_t num_locations = 9;
  std::size_t refs_per_image = 5;
  int min_count = 5;

  void validate() const;
};

// A scene is one object with a colour and a size, at one location, in one
// setting. Rendering puts the object's code at its location and the
// setting's code everywhere else; the global vector is the spatial mean.
struct ToyScene {
  std::size_t object = 0, color = 0, size = 0, setting = 0, location = 0;
};

class CaptionGrammar {
 public:
  CaptionGrammar(std::uint64_t seed, std::size_t feature_dim, std::size_t num_locations);

  ToyScene sample_scene(Rng& rng) const;
  ImageFeatures render(const ToyScene& scene, Rng& rng) const;
  std::string describe(const ToyScene& scene, Rng& rng) const;

  std::size_t num_objects() const;
  std::size_t num_colors() const;
  std::size_t num_sizes() const;
  std::size_t num_settings() const;

 private:
  std::size_t feature_dim_, num_locations_;
  std::vector<std::vector<double>> object_codes_, color_codes_, size_codes_, setting_codes_;
};

// Writes train.jsonl, val.jsonl, test.jsonl and vocab.tsv into `dir`
// (created if missing). The output is a pure function of `cfg`.
void gen_dataset(const DataGenConfig& cfg, const std::string& dir);

}  // namespace scst

#endif  // SCST_DATASET_H_
