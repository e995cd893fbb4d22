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

#include "scst/scst_c.h"

#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "scst/dataset.h"
#include "scst/decode.h"
#include "scst/error.h"
#include "scst/evaluation.h"
#include "scst/train_config.h"
#include "scst/trainer.h"

struct scst_config {
  std::string path;
  std::vector<std::string> overrides;
  scst::TrainConfig resolved;
};

struct scst_dataset {
  scst::Dataset data;
};

struct scst_model {
  scst::Captioner model;
};

namespace {

thread_local std::string g_last_error;

scst_status status_for(scst::ErrorKind kind) {
  switch (kind) {
    case scst::ErrorKind::kDimension: return SCST_ERR_DIMENSION;
    case scst::ErrorKind::kInput: return SCST_ERR_INPUT;
    case scst::ErrorKind::kUsage: return SCST_ERR_USAGE;
    case scst::ErrorKind::kConfig: return SCST_ERR_CONFIG;
    case scst::ErrorKind::kNumeric: return SCST_ERR_NUMERIC;
    case scst::ErrorKind::kIo: return SCST_ERR_IO;
  }
  return SCST_ERR_INTERNAL;
}

template <class F>
scst_status guarded(F&& body) {
  try {
    body();
    return SCST_OK;
  } catch (const scst::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SCST_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SCST_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw scst::UsageError(std::string(what) + " must not be NULL");
}

std::vector<const scst::Captioner*> members(const scst_model* const* models, size_t n) {
  require(models, "models");
  if (n == 0) throw scst::UsageError("at least one model is required");
  std::vector<const scst::Captioner*> out;
  for (size_t i = 0; i < n; ++i) {
    require(models[i], "model handle");
    out.push_back(&models[i]->model);
  }
  return out;
}

scst::BeamConfig beam_config(size_t beam, double margin) {
  scst::BeamConfig b{beam, margin, 0};
  try {
    b.validate();
  } catch (const scst::ConfigError& e) {
    throw scst::UsageError(e.what());
  }
  return b;
}

}  // namespace

extern "C" {

const char* scst_last_error(void) { return g_last_error.c_str(); }

const char* scst_status_name(scst_status status) {
  switch (status) {
    case SCST_OK: return "ok";
    case SCST_ERR_DIMENSION: return "dimension error";
    case SCST_ERR_INPUT: return "input error";
    case SCST_ERR_USAGE: return "usage error";
    case SCST_ERR_CONFIG: return "config error";
    case SCST_ERR_NUMERIC: return "numeric error";
    case SCST_ERR_IO: return "io error";
    case SCST_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

scst_status scst_config_load(const char* path, scst_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto cfg = std::make_unique<scst_config>();
    cfg->path = path ? path : "";
    cfg->resolved = scst::load_train_config(cfg->path);
    *out = cfg.release();
  });
}

scst_status scst_config_set(scst_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    std::vector<std::string> next = cfg->overrides;
    next.push_back(std::string(key) + "=" + value);
    cfg->resolved = scst::load_train_config(cfg->path, next);
    cfg->overrides = std::move(next);
  });
}

scst_status scst_config_save(const scst_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "config");
    require(path, "path");
    std::ofstream out(path, std::ios::binary);
    out << scst::format_train_config(cfg->resolved);
    if (!out) throw scst::IoError(std::string("cannot write ") + path);
  });
}

void scst_config_free(scst_config* cfg) { delete cfg; }

scst_status scst_gen_data(const char* out_dir, uint64_t seed, size_t n_train, size_t n_val,
                          size_t n_test, int min_count) {
  return guarded([&] {
    require(out_dir, "out_dir");
    scst::DataGenConfig g;
    g.seed = seed;
    g.n_train = n_train;
    g.n_val = n_val;
    g.n_test = n_test;
    g.min_count = min_count;
    scst::gen_dataset(g, out_dir);
  });
}

scst_status scst_dataset_load(const char* dir, scst_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = nullptr;
    *out = new scst_dataset{scst::Dataset::load(dir)};
  });
}

scst_status scst_dataset_size(const scst_dataset* data, const char* split, size_t* out) {
  return guarded([&] {
    require(data, "dataset");
    require(split, "split");
    require(out, "out");
    *out = data->data.split(split).size();
  });
}

void scst_dataset_free(scst_dataset* data) { delete data; }

scst_status scst_model_load(const char* path, scst_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new scst_model{scst::Captioner::load(path)};
  });
}

scst_status scst_model_info_get(const scst_model* model, scst_model_info* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const scst::ModelConfig& c = model->model.config();
    *out = {static_cast<uint32_t>(c.arch), c.vocab_size, c.hidden,
            c.feature_dim, c.num_locations, c.max_len};
  });
}

void scst_model_free(scst_model* model) { delete model; }

scst_status scst_decode_features(const scst_model* const* models, size_t n_models,
                                 const double* global, const double* spatial, size_t beam,
                                 double prune_margin, int32_t* tokens, size_t capacity,
                                 size_t* length, double* logprob) {
  return guarded([&] {
    const auto ms = members(models, n_models);
    require(global, "global");
    require(spatial, "spatial");
    require(tokens, "tokens");
    require(length, "length");
    const scst::ModelConfig& c = ms.front()->config();
    scst::ImageFeatures f;
    f.global = scst::Tensor({c.feature_dim}, std::vector<double>(global, global + c.feature_dim));
    const size_t n = c.num_locations * c.feature_dim;
    f.spatial = scst::Tensor({c.num_locations, c.feature_dim},
                             std::vector<double>(spatial, spatial + n));
    const scst::Hypothesis h =
        scst::decode(scst::Ensemble(ms), f, beam_config(beam, prune_margin));
    if (h.tokens.size() > capacity) {
      throw scst::UsageError("token buffer holds " + std::to_string(capacity) + ", need " +
                             std::to_string(h.tokens.size()));
    }
    std::copy(h.tokens.begin(), h.tokens.end(), tokens);
    *length = h.tokens.size();
    if (logprob) *logprob = h.score;
  });
}

scst_status scst_train_xe(const scst_config* cfg, const scst_dataset* data, const char* out_dir,
                          double* best_val_cider) {
  return guarded([&] {
    require(cfg, "config");
    require(data, "dataset");
    require(out_dir, "out_dir");
    const scst::XeResult r = scst::train_xe(cfg->resolved, data->data, out_dir);
    if (best_val_cider) *best_val_cider = r.best_val_cider;
  });
}

scst_status scst_train_rl(const scst_config* cfg, const scst_dataset* data,
                          const scst_model* init, const char* out_dir, double* best_val) {
  return guarded([&] {
    require(cfg, "config");
    require(data, "dataset");
    require(init, "init model");
    require(out_dir, "out_dir");
    const scst::RlResult r = scst::train_rl(cfg->resolved, data->data, init->model, out_dir);
    if (best_val) *best_val = r.best_val;
  });
}

scst_status scst_decode_split(const scst_model* const* models, size_t n_models,
                              const scst_dataset* data, const char* split, size_t beam,
                              double prune_margin, const char* out_jsonl) {
  return guarded([&] {
    const auto ms = members(models, n_models);
    require(data, "dataset");
    require(split, "split");
    require(out_jsonl, "out_jsonl");
    const scst::Split& s = data->data.split(split);
    const auto hyps = scst::decode_split(scst::Ensemble(ms), s, beam_config(beam, prune_margin));
    scst::write_decode_jsonl(out_jsonl, s, hyps, data->data.vocab);
  });
}

scst_status scst_eval_files(const char* candidates_jsonl, const char* references_jsonl,
                            const char* vocab_path, const char* out_csv, scst_scores* corpus) {
  return guarded([&] {
    require(candidates_jsonl, "candidates_jsonl");
    require(references_jsonl, "references_jsonl");
    require(vocab_path, "vocab_path");
    require(out_csv, "out_csv");
    const scst::Vocab vocab = scst::Vocab::load(vocab_path);
    const scst::Split refs = scst::load_split(references_jsonl, vocab);
    const scst::EvalSummary s =
        scst::eval_candidates(scst::read_decode_jsonl(candidates_jsonl), refs, out_csv);
    if (corpus) *corpus = {s.cider.corpus_score, s.bleu.corpus_score, s.rouge.corpus_score};
  });
}

scst_status scst_eval_run(const char* const* checkpoints, size_t n_checkpoints,
                          const scst_dataset* data, const char* split, size_t beam,
                          double prune_margin, const char* out_csv) {
  return guarded([&] {
    require(checkpoints, "checkpoints");
    require(data, "dataset");
    require(split, "split");
    require(out_csv, "out_csv");
    std::vector<std::string> paths;
    for (size_t i = 0; i < n_checkpoints; ++i) {
      require(checkpoints[i], "checkpoint path");
      paths.emplace_back(checkpoints[i]);
    }
    const auto rows =
        scst::eval_run(paths, data->data.split(split), beam_config(beam, prune_margin));
    scst::write_eval_csv(out_csv, rows);
  });
}

scst_status scst_sweep_beam(const scst_model* const* models, size_t n_models,
                            const scst_dataset* data, const char* split, const size_t* widths,
                            size_t n_widths, double prune_margin, const char* out_csv) {
  return guarded([&] {
    const auto ms = members(models, n_models);
    require(data, "dataset");
    require(split, "split");
    require(widths, "widths");
    require(out_csv, "out_csv");
    std::vector<size_t> w(widths, widths + n_widths);
    for (size_t x : w) beam_config(x, prune_margin);
    const auto rows = scst::sweep_beam(scst::Ensemble(ms), data->data.split(split), w, prune_margin);
    scst::write_sweep_csv(out_csv, rows);
  });
}

}  // extern "C"
