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

// Decoding whole splits, scoring them, and the table-shaped CSV outputs.

#ifndef SCST_EVALUATION_H_
#define SCST_EVALUATION_H_

#include <string>
#include <vector>

#include "scst/dataset.h"
#include "scst/decode.h"
#include "scst/metrics.h"

namespace scst {

// One hypothesis per example, in split order. Parallel over examples.
std::vector<Hypothesis> decode_split(const Ensemble& models, const Split& split,
                                     const BeamConfig& cfg);
std::vector<Sentence> tokens_of(const std::vector<Hypothesis>& hyps);

// Scores candidates against the split's references with document
// frequencies taken from those same references.
EvalSummary score_split(const std::vector<Sentence>& candidates, const Split& split);
double summary_value(const EvalSummary& s, MetricKind kind);

// Greedy-decode score of `model` on `split` under `kind`.
double greedy_score(const Captioner& model, const Split& split, MetricKind kind);

struct EvalRow {
  std::string model;
  std::string search;
  double cider = 0.0, bleu4 = 0.0, rouge_l = 0.0;
};

// Greedy and (if beam width > 1) beam rows for every checkpoint, then the
// same for their ensemble when more than one checkpoint is given.
std::vector<EvalRow> eval_run(const std::vector<std::string>& checkpoints, const Split& split,
                              const BeamConfig& beam);
void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows);

struct SweepRow {
  std::size_t width = 1;
  double cider = 0.0, bleu4 = 0.0, rouge_l = 0.0;
};
std::vector<SweepRow> sweep_beam(const Ensemble& models, const Split& split,
                                 const std::vector<std::size_t>& widths, double prune_margin);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// JSON lines: {"id", "tokens", "text", "logprob", "mean_token_logprob"}.
void write_decode_jsonl(const std::string& path, const Split& split,
                        const std::vector<Hypothesis>& hyps, const Vocab& vocab);

struct Candidate {
  std::string id;
  Sentence tokens;
};
std::vector<Candidate> read_decode_jsonl(const std::string& path);

// Matches candidates to `split` by id (InputError on a missing or unknown
// id) and writes id,cider_d,bleu4,rouge_l rows plus a final corpus row.
EvalSummary eval_candidates(const std::vector<Candidate>& candidates, const Split& split,
                            const std::string& out_csv);

}  // namespace scst

#endif  // SCST_EVALUATION_H_
