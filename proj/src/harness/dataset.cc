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

#include "scst/dataset.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scst/error.h"

namespace scst {
namespace {

using nlohmann::json;

// Each concept lists its surface forms; the first is the common one.
struct Concept {
  std::vector<std::string> forms;
  std::vector<double> weights;  // relative frequency of each form
};

const std::vector<Concept>& objects() {
  static const std::vector<Concept> v = {
      {{"dog", "puppy"}, {3, 1}},  {{"cat", "kitten"}, {3, 1}}, {{"ball"}, {1}},
      {{"car"}, {1}},              {{"bird"}, {1}},             {{"cup", "mug"}, {2, 1}},
      {{"chair"}, {1}},            {{"kite"}, {1}},             {{"horse", "pony"}, {3, 1}},
      {{"boat"}, {1}},
  };
  return v;
}

const std::vector<Concept>& colors() {
  // "crimson" is deliberately rare so the min-count rule has work to do.
  static const std::vector<Concept> v = {
      {{"red", "crimson"}, {499, 1}}, {{"blue"}, {1}},  {{"green"}, {1}}, {{"yellow"}, {1}},
      {{"black"}, {1}},               {{"white"}, {1}}, {{"brown"}, {1}},
  };
  return v;
}

const std::vector<Concept>& sizes() {
  static const std::vector<Concept> v = {{{"small", "little"}, {2, 1}}, {{"big", "large"}, {2, 1}}};
  return v;
}

const std::vector<Concept>& settings() {
  static const std::vector<Concept> v = {
      {{"on the grass", "in a field", "on a lawn"}, {2, 1, 1}},
      {{"on the street", "on a road"}, {2, 1}},
      {{"on a table", "on the table"}, {1, 1}},
      {{"near the water", "by the lake"}, {2, 1}},
      {{"in a room", "inside a house"}, {2, 1}},
      {{"on the beach", "on the sand"}, {2, 1}},
  };
  return v;
}

// Slots: {s}ize {c}olor {o}bject {p}lace. No phrasing dominates and lengths run
// from 3 to 7 words, so the consensus caption differs from the most precise
// (short) one and the highest-recall (long) one.
const Concept& templates() {
  static const Concept v = {{"a {c} {o}", "{c} {o} {p}", "a {s} {c} {o} {p}",
                             "a {s} {o} that is {c}", "the {o} {p} is {c}",
                             "a {c} {o} sitting {p}", "a {c} {o} that is sitting {p}"},
                            {2, 2, 3, 2, 1, 3, 1}};
  return v;
}

const std::string& pick(const Concept& c, Rng& rng) {
  double total = 0.0;
  for (double w : c.weights) total += w;
  std::vector<double> p;
  for (double w : c.weights) p.push_back(w / total);
  return c.forms[rng.categorical(p)];
}

std::vector<std::vector<double>> random_codes(std::size_t n, std::size_t dim, double scale,
                                              Rng& rng) {
  std::vector<std::vector<double>> codes(n, std::vector<double>(dim));
  for (auto& c : codes) {
    for (double& v : c) v = scale * rng.normal();
  }
  return codes;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::vector<double> to_vector(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

std::vector<std::string> split_words(const std::string& sentence) {
  std::istringstream in(sentence);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sentences, int min_count) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& s : sentences) {
    for (const std::string& w : s) {
      if (w == kBosWord || w == kEosWord || w == kUnkWord) {
        throw InputError("reserved token '" + w + "' in caption text");
      }
      ++counts[w];
    }
  }
  Vocab v;
  v.words_ = {kBosWord, kEosWord, kUnkWord};
  v.counts_ = {0, static_cast<std::int64_t>(sentences.size()), 0};
  for (const auto& [w, c] : counts) {
    if (c >= min_count) {
      v.words_.push_back(w);
      v.counts_.push_back(c);
    } else {
      v.counts_[static_cast<std::size_t>(kUnk)] += c;
    }
  }
  for (std::size_t i = 0; i < v.words_.size(); ++i) {
    v.index_[v.words_[i]] = static_cast<TokenId>(i);
  }
  return v;
}

TokenId Vocab::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(words_.size()));
  }
  return words_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(const std::string& sentence) const {
  std::vector<TokenId> out;
  for (const std::string& w : split_words(sentence)) out.push_back(id(w));
  out.push_back(kEos);
  return out;
}

std::string Vocab::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t == kEos) break;
    if (!out.empty()) out.push_back(' ');
    out += word(t);
  }
  return out;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out = open_out(path);
  out << "id\tword\tcount\n";
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << i << '\t' << words_[i] << '\t' << counts_[i] << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "id\tword\tcount") {
    throw IoError(path + ": missing vocab header");
  }
  Vocab v;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    std::istringstream row(line);
    std::size_t id = 0;
    std::string word;
    std::int64_t count = 0;
    if (!(row >> id >> word >> count) || id != v.words_.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed vocab row");
    }
    v.index_[word] = static_cast<TokenId>(id);
    v.words_.push_back(word);
    v.counts_.push_back(count);
  }
  if (v.words_.size() < 3 || v.words_[0] != kBosWord || v.words_[1] != kEosWord ||
      v.words_[2] != kUnkWord) {
    throw IoError(path + ": vocab must start with " + kBosWord + ", " + kEosWord + ", " +
                  kUnkWord);
  }
  return v;
}

std::vector<References> Split::references() const {
  std::vector<References> out;
  out.reserve(examples.size());
  for (const Example& e : examples) out.push_back(e.references);
  return out;
}

Split load_split(const std::string& path, const Vocab& vocab) {
  std::ifstream in = open_in(path);
  Split split;
  split.name = std::filesystem::path(path).stem().string();
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      Example e;
      e.id = j.at("id").get<std::string>();
      const auto global = j.at("global").get<std::vector<double>>();
      const auto spatial = j.at("spatial").get<std::vector<std::vector<double>>>();
      if (global.empty() || spatial.empty()) throw InputError("empty features");
      std::vector<double> flat;
      for (const auto& row : spatial) {
        if (row.size() != global.size()) throw InputError("spatial/global width mismatch");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      e.features.global = Tensor({global.size()}, global);
      e.features.spatial = Tensor({spatial.size(), global.size()}, flat);
      e.captions = j.at("references").get<std::vector<std::string>>();
      if (e.captions.empty()) throw InputError("no references");
      for (const std::string& c : e.captions) e.references.push_back(vocab.encode(c));
      split.examples.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw IoError(where + ": " + ex.what());
    } catch (const Error& ex) {
      throw IoError(where + ": " + ex.what());
    }
  }
  if (split.examples.empty()) throw IoError(path + ": no examples");
  return split;
}

std::size_t Dataset::feature_dim() const { return train.examples.front().features.global.size(); }

std::size_t Dataset::num_locations() const {
  return train.examples.front().features.spatial.rows();
}

const Split& Dataset::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw UsageError("unknown split '" + name + "' (expected train, val or test)");
}

Dataset Dataset::load(const std::string& dir) {
  const std::filesystem::path d(dir);
  Dataset ds;
  ds.vocab = Vocab::load((d / "vocab.tsv").string());
  ds.train = load_split((d / "train.jsonl").string(), ds.vocab);
  ds.val = load_split((d / "val.jsonl").string(), ds.vocab);
  ds.test = load_split((d / "test.jsonl").string(), ds.vocab);
  return ds;
}

void DataGenConfig::validate() const {
  if (n_train < 1 || n_val < 1 || n_test < 1) throw ConfigError("split sizes must be >= 1");
  if (feature_dim < 1 || num_locations < 2) {
    throw ConfigError("need feature_dim >= 1 and num_locations >= 2");
  }
  if (refs_per_image < 1) throw ConfigError("refs_per_image must be >= 1");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
}

CaptionGrammar::CaptionGrammar(std::uint64_t seed, std::size_t feature_dim,
                               std::size_t num_locations)
    : feature_dim_(feature_dim), num_locations_(num_locations) {
  Rng rng(seed ^ 0xC0DEC0DEULL);
  object_codes_ = random_codes(objects().size(), feature_dim, 1.0, rng);
  color_codes_ = random_codes(colors().size(), feature_dim, 0.7, rng);
  size_codes_ = random_codes(sizes().size(), feature_dim, 0.5, rng);
  setting_codes_ = random_codes(settings().size(), feature_dim, 0.7, rng);
}

std::size_t CaptionGrammar::num_objects() const { return objects().size(); }
std::size_t CaptionGrammar::num_colors() const { return colors().size(); }
std::size_t CaptionGrammar::num_sizes() const { return sizes().size(); }
std::size_t CaptionGrammar::num_settings() const { return settings().size(); }

ToyScene CaptionGrammar::sample_scene(Rng& rng) const {
  ToyScene s;
  s.object = rng.below(num_objects());
  s.color = rng.below(num_colors());
  s.size = rng.below(num_sizes());
  s.setting = rng.below(num_settings());
  s.location = rng.below(num_locations_);
  return s;
}

ImageFeatures CaptionGrammar::render(const ToyScene& s, Rng& rng) const {
  ImageFeatures f;
  f.spatial = Tensor({num_locations_, feature_dim_});
  for (std::size_t i = 0; i < num_locations_; ++i) {
    for (std::size_t k = 0; k < feature_dim_; ++k) {
      const double v = i == s.location
                           ? object_codes_[s.object][k] + color_codes_[s.color][k] +
                                 size_codes_[s.size][k]
                           : setting_codes_[s.setting][k];
      f.spatial.at(i, k) = round6(v + 0.05 * rng.normal());
    }
  }
  f.global = Tensor({feature_dim_});
  for (std::size_t i = 0; i < num_locations_; ++i) {
    for (std::size_t k = 0; k < feature_dim_; ++k) f.global[k] += f.spatial.at(i, k);
  }
  for (double& v : f.global.data()) v /= static_cast<double>(num_locations_);
  return f;
}

std::string CaptionGrammar::describe(const ToyScene& s, Rng& rng) const {
  const std::string& tmpl = pick(templates(), rng);
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 's': out += pick(sizes()[s.size], rng); break;
        case 'c': out += pick(colors()[s.color], rng); break;
        case 'o': out += pick(objects()[s.object], rng); break;
        case 'p': out += pick(settings()[s.setting], rng); break;
        default: throw UsageError("bad template slot");
      }
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

void gen_dataset(const DataGenConfig& cfg, const std::string& dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  const CaptionGrammar grammar(cfg.seed, cfg.feature_dim, cfg.num_locations);
  Rng rng(cfg.seed);
  struct Item {
    std::string id;
    ImageFeatures features;
    std::vector<std::string> captions;
  };
  auto make_split = [&](const std::string& name, std::size_t n) {
    std::vector<Item> items(n);
    for (std::size_t i = 0; i < n; ++i) {
      const ToyScene scene = grammar.sample_scene(rng);
      char id[32];
      std::snprintf(id, sizeof id, "%s-%06zu", name.c_str(), i);
      items[i].id = id;
      items[i].features = grammar.render(scene, rng);
      for (std::size_t r = 0; r < cfg.refs_per_image; ++r) {
        items[i].captions.push_back(grammar.describe(scene, rng));
      }
    }
    return items;
  };
  const auto train = make_split("train", cfg.n_train);
  const auto val = make_split("val", cfg.n_val);
  const auto test = make_split("test", cfg.n_test);

  std::vector<std::vector<std::string>> train_sentences;
  for (const Item& it : train) {
    for (const std::string& c : it.captions) train_sentences.push_back(split_words(c));
  }
  const std::filesystem::path d(dir);
  Vocab::build(train_sentences, cfg.min_count).save((d / "vocab.tsv").string());

  auto write = [&](const std::string& name, const std::vector<Item>& items) {
    const std::string path = (d / (name + ".jsonl")).string();
    std::ofstream out = open_out(path);
    for (const Item& it : items) {
      std::vector<std::vector<double>> spatial;
      for (std::size_t i = 0; i < it.features.spatial.rows(); ++i) {
        const auto row = it.features.spatial.row(i);
        spatial.emplace_back(row.begin(), row.end());
      }
      json j;
      j["id"] = it.id;
      j["global"] = to_vector(it.features.global);
      j["spatial"] = spatial;
      j["references"] = it.captions;
      out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
  };
  write("train", train);
  write("val", val);
  write("test", test);
}

}  // namespace scst
