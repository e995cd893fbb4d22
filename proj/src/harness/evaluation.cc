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

#include "scst/evaluation.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include "json.hpp"
#include "scst/error.h"
#include "scst/parallel.h"

namespace scst {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

// Fixed-format numbers so CSVs are byte-stable.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

EvalRow make_row(const std::string& model, const std::string& search, const EvalSummary& s) {
  return {model, search, s.cider.corpus_score, s.bleu.corpus_score, s.rouge.corpus_score};
}

}  // namespace

std::vector<Hypothesis> decode_split(const Ensemble& models, const Split& split,
                                     const BeamConfig& cfg) {
  cfg.validate();
  std::vector<Hypothesis> out(split.size());
  parallel_for(split.size(), [&](std::size_t i) {
    out[i] = decode(models, split.examples[i].features, cfg);
    out[i].states.clear();
  });
  return out;
}

std::vector<Sentence> tokens_of(const std::vector<Hypothesis>& hyps) {
  std::vector<Sentence> out;
  out.reserve(hyps.size());
  for (const Hypothesis& h : hyps) out.push_back(h.tokens);
  return out;
}

EvalSummary score_split(const std::vector<Sentence>& candidates, const Split& split) {
  const std::vector<References> refs = split.references();
  return evaluate_all(candidates, refs, NGramStats::build(refs));
}

double summary_value(const EvalSummary& s, MetricKind kind) {
  switch (kind) {
    case MetricKind::kCiderD: return s.cider.corpus_score;
    case MetricKind::kBleu4: return s.bleu.corpus_score;
    case MetricKind::kRougeL: return s.rouge.corpus_score;
  }
  throw UsageError("unknown metric kind");
}

double greedy_score(const Captioner& model, const Split& split, MetricKind kind) {
  const auto hyps = decode_split(Ensemble({&model}), split, BeamConfig{});
  return summary_value(score_split(tokens_of(hyps), split), kind);
}

std::vector<EvalRow> eval_run(const std::vector<std::string>& checkpoints, const Split& split,
                              const BeamConfig& beam) {
  if (checkpoints.empty()) throw UsageError("eval needs at least one checkpoint");
  beam.validate();
  std::vector<std::unique_ptr<Captioner>> models;
  for (const std::string& path : checkpoints) {
    models.push_back(std::make_unique<Captioner>(Captioner::load(path)));
  }
  std::vector<EvalRow> rows;
  auto run = [&](const Ensemble& e, const std::string& name) {
    BeamConfig greedy = beam;
    greedy.width = 1;
    rows.push_back(make_row(name, "greedy",
                            score_split(tokens_of(decode_split(e, split, greedy)), split)));
    if (beam.width > 1) {
      rows.push_back(make_row(name, "beam" + std::to_string(beam.width),
                              score_split(tokens_of(decode_split(e, split, beam)), split)));
    }
  };
  std::vector<const Captioner*> all;
  for (std::size_t i = 0; i < models.size(); ++i) {
    all.push_back(models[i].get());
    run(Ensemble({models[i].get()}), std::filesystem::path(checkpoints[i]).stem().string());
  }
  if (models.size() > 1) run(Ensemble(all), "ensemble" + std::to_string(models.size()));
  return rows;
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ofstream out = open_out(path);
  out << "model,search,cider,bleu4,rouge_l\n";
  for (const EvalRow& r : rows) {
    out << r.model << ',' << r.search << ',' << num(r.cider) << ',' << num(r.bleu4) << ','
        << num(r.rouge_l) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<SweepRow> sweep_beam(const Ensemble& models, const Split& split,
                                 const std::vector<std::size_t>& widths, double prune_margin) {
  if (widths.empty()) throw UsageError("beam sweep needs at least one width");
  std::vector<SweepRow> rows;
  for (std::size_t w : widths) {
    const BeamConfig cfg{w, prune_margin, 0};
    const EvalSummary s = score_split(tokens_of(decode_split(models, split, cfg)), split);
    rows.push_back({w, s.cider.corpus_score, s.bleu.corpus_score, s.rouge.corpus_score});
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out = open_out(path);
  out << "beam,cider,bleu4,rouge_l\n";
  for (const SweepRow& r : rows) {
    out << r.width << ',' << num(r.cider) << ',' << num(r.bleu4) << ',' << num(r.rouge_l)
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void write_decode_jsonl(const std::string& path, const Split& split,
                        const std::vector<Hypothesis>& hyps, const Vocab& vocab) {
  if (hyps.size() != split.size()) throw UsageError("one hypothesis per example expected");
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    json j;
    j["id"] = split.examples[i].id;
    j["tokens"] = hyps[i].tokens;
    j["text"] = vocab.decode(hyps[i].tokens);
    j["logprob"] = hyps[i].score;
    j["mean_token_logprob"] = hyps[i].mean_logprob();
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<Candidate> read_decode_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Candidate> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("tokens").get<Sentence>()});
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

EvalSummary eval_candidates(const std::vector<Candidate>& candidates, const Split& split,
                            const std::string& out_csv) {
  std::map<std::string, const Sentence*> by_id;
  for (const Candidate& c : candidates) {
    if (!by_id.emplace(c.id, &c.tokens).second) throw InputError("duplicate candidate id " + c.id);
  }
  std::vector<Sentence> ordered;
  for (const Example& e : split.examples) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) throw InputError("no candidate for example " + e.id);
    ordered.push_back(*it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) throw InputError("candidate " + by_id.begin()->first + " has no reference");
  const EvalSummary s = score_split(ordered, split);
  std::ofstream out = open_out(out_csv);
  out << "id,cider_d,bleu4,rouge_l\n";
  for (std::size_t i = 0; i < split.size(); ++i) {
    out << split.examples[i].id << ',' << num(s.cider.sentence_scores[i]) << ','
        << num(s.bleu.sentence_scores[i]) << ',' << num(s.rouge.sentence_scores[i]) << '\n';
  }
  out << "corpus," << num(s.cider.corpus_score) << ',' << num(s.bleu.corpus_score) << ','
      << num(s.rouge.corpus_score) << '\n';
  if (!out) throw IoError("failed writing " + out_csv);
  return s;
}

}  // namespace scst
