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

/* C interface to the captioning library.
 *
 * Every call returns an scst_status; on failure scst_last_error() holds a
 * message for the calling thread until its next failing call. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_free function (which accepts NULL). */

#ifndef SCST_SCST_C_H_
#define SCST_SCST_C_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SCST_API __declspec(dllexport)
#else
#define SCST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum scst_status {
  SCST_OK = 0,
  SCST_ERR_DIMENSION = 1,
  SCST_ERR_INPUT = 2,
  SCST_ERR_USAGE = 3,
  SCST_ERR_CONFIG = 4,
  SCST_ERR_NUMERIC = 5,
  SCST_ERR_IO = 6,
  SCST_ERR_INTERNAL = 7
} scst_status;

typedef struct scst_config scst_config;
typedef struct scst_dataset scst_dataset;
typedef struct scst_model scst_model;

typedef struct scst_model_info {
  uint32_t arch; /* 1 fc, 2 att2in, 3 att2all */
  size_t vocab_size;
  size_t hidden;
  size_t feature_dim;
  size_t num_locations;
  size_t max_len;
} scst_model_info;

typedef struct scst_scores {
  double cider;
  double bleu4;
  double rouge_l;
} scst_scores;

SCST_API const char* scst_last_error(void);
SCST_API const char* scst_status_name(scst_status status);

/* Training configuration. `path` may be NULL for defaults. Keys are
 * "section.key" as in the config file. */
SCST_API scst_status scst_config_load(const char* path, scst_config** out);
SCST_API scst_status scst_config_set(scst_config* cfg, const char* key, const char* value);
/* Writes the effective configuration as INI text. */
SCST_API scst_status scst_config_save(const scst_config* cfg, const char* path);
SCST_API void scst_config_free(scst_config* cfg);

SCST_API scst_status scst_gen_data(const char* out_dir, uint64_t seed, size_t n_train,
                                   size_t n_val, size_t n_test, int min_count);

SCST_API scst_status scst_dataset_load(const char* dir, scst_dataset** out);
/* split is "train", "val" or "test". */
SCST_API scst_status scst_dataset_size(const scst_dataset* data, const char* split,
                                       size_t* out);
SCST_API void scst_dataset_free(scst_dataset* data);

SCST_API scst_status scst_model_load(const char* path, scst_model** out);
SCST_API scst_status scst_model_info_get(const scst_model* model, scst_model_info* out);
SCST_API void scst_model_free(scst_model* model);

/* Decodes one image with the ensemble of `n_models` models (greedy when
 * beam == 1). `global` has feature_dim values, `spatial` num_locations *
 * feature_dim row-major. Writes up to `capacity` tokens. */
SCST_API scst_status scst_decode_features(const scst_model* const* models, size_t n_models,
                                          const double* global, const double* spatial,
                                          size_t beam, double prune_margin, int32_t* tokens,
                                          size_t capacity, size_t* length, double* logprob);

/* Trains from scratch under cross entropy; writes xe_best.ckpt and
 * xe_log.csv into out_dir. best_val_cider may be NULL. */
SCST_API scst_status scst_train_xe(const scst_config* cfg, const scst_dataset* data,
                                   const char* out_dir, double* best_val_cider);
/* Fine-tunes `init` with the configured estimator and reward; writes
 * rl_best.ckpt and rl_diagnostics.csv. best_val may be NULL. */
SCST_API scst_status scst_train_rl(const scst_config* cfg, const scst_dataset* data,
                                   const scst_model* init, const char* out_dir,
                                   double* best_val);

/* Decodes a dataset split to JSON lines. */
SCST_API scst_status scst_decode_split(const scst_model* const* models, size_t n_models,
                                       const scst_dataset* data, const char* split, size_t beam,
                                       double prune_margin, const char* out_jsonl);
/* Scores decoder JSON lines against a reference split file (captions are
 * encoded with the vocabulary at vocab_path). corpus may be NULL. */
SCST_API scst_status scst_eval_files(const char* candidates_jsonl, const char* references_jsonl,
                                     const char* vocab_path, const char* out_csv,
                                     scst_scores* corpus);
/* Greedy and beam rows per checkpoint and for their ensemble. */
SCST_API scst_status scst_eval_run(const char* const* checkpoints, size_t n_checkpoints,
                                   const scst_dataset* data, const char* split, size_t beam,
                                   double prune_margin, const char* out_csv);
SCST_API scst_status scst_sweep_beam(const scst_model* const* models, size_t n_models,
                                     const scst_dataset* data, const char* split,
                                     const size_t* widths, size_t n_widths, double prune_margin,
                                     const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* SCST_SCST_C_H_ */
