// rescore/rescore.h

// Copyright 2026 The nbest-rescore Authors
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

#ifndef RESCORE_RESCORE_H_
#define RESCORE_RESCORE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(RS_BUILDING_LIBRARY)
#define RS_API __attribute__((visibility("default")))
#else
#define RS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

// Every call that can fail returns a status; on failure a message is
// available from rs_last_error() on the same thread until the next call.
typedef enum rs_status {
  RS_OK = 0,
  RS_ERR_USAGE = 1,
  RS_ERR_CONTRACT = 2,
  RS_ERR_DIMENSION = 3,
  RS_ERR_LENGTH = 4,
  RS_ERR_VOCAB = 5,
  RS_ERR_CONFIG = 6,
  RS_ERR_EMPTY_INPUT = 7,
  RS_ERR_PARSE = 8,
  RS_ERR_IO = 9,
  RS_ERR_NUMERIC = 10,
  RS_ERR_INTERNAL = 11
} rs_status;

RS_API const char *rs_status_name(rs_status status);
RS_API const char *rs_last_error(void);
RS_API const char *rs_version(void);

// Strings handed out by the library are released with rs_string_free.
RS_API void rs_string_free(char *s);

// ---- configs and stages -------------------------------------------------

typedef void (*rs_log_fn)(const char *line, void *user);

// Fills every default of a JSON config ("" or "{}" for all defaults).
RS_API rs_status rs_config_resolve(const char *config_json, char **resolved_json);

// Runs one of gen, adapt, mwer, tune, rescore, eval, bench, pipeline.
// `log` may be NULL. On success *summary_json holds the stage report.
RS_API rs_status rs_run_stage(const char *stage, const char *config_json,
                              int resume, rs_log_fn log, void *user,
                              char **summary_json);

// ---- models -------------------------------------------------------------

typedef struct rs_model rs_model;

// scorer_kind: causal_ll, bidirectional_pll, pooled_cls, pooled_last or
// pooled_attention; the checkpoint must be able to serve it.
RS_API rs_status rs_model_load(const char *checkpoint_path,
                               const char *scorer_kind,
                               int paper_literal_pll_sign,
                               int length_normalize, rs_model **out);
RS_API void rs_model_free(rs_model *model);
// Config and parameter count as JSON.
RS_API rs_status rs_model_info(const rs_model *model, char **info_json);
RS_API rs_status rs_model_score(const rs_model *model, const char *text,
                                double *score);
// Scores n texts as one n-best.
RS_API rs_status rs_model_score_batch(const rs_model *model,
                                      const char *const *texts, size_t n,
                                      double *scores);
RS_API uint64_t rs_model_forward_count(const rs_model *model);
RS_API void rs_model_reset_forward_count(rs_model *model);
// Latency of rescoring one synthetic n-best; options_json may be NULL.
RS_API rs_status rs_model_bench(const rs_model *model, const char *options_json,
                                char **result_json);

// ---- n-best sets ----------------------------------------------------------

typedef struct rs_nbest_set rs_nbest_set;

typedef enum rs_selection {
  RS_SELECT_FIRST_PASS = 0,
  RS_SELECT_RESCORED = 1,
  RS_SELECT_ORACLE = 2
} rs_selection;

RS_API rs_status rs_nbest_read(const char *path, rs_nbest_set **out);
RS_API void rs_nbest_free(rs_nbest_set *set);
RS_API size_t rs_nbest_size(const rs_nbest_set *set);
// Annotates every hypothesis with lm/interpolated scores and rank and sets
// each utterance's selection.
RS_API rs_status rs_nbest_rescore(rs_nbest_set *set, const rs_model *model,
                                  double lambda, int threads);
// Selected hypothesis of utterance i after rescoring.
RS_API rs_status rs_nbest_selected(const rs_nbest_set *set, size_t i,
                                   size_t *index);
RS_API rs_status rs_nbest_write(const rs_nbest_set *set, const char *path);
// Corpus WER in percent.
RS_API rs_status rs_nbest_wer(const rs_nbest_set *set, rs_selection which,
                              double *wer_percent);

// ---- metrics --------------------------------------------------------------

// Word-level edit distance after text normalization.
RS_API rs_status rs_edit_distance(const char *hyp, const char *ref,
                                  size_t *distance);
// 100 * (baseline - system) / baseline.
RS_API rs_status rs_relative_werr(double baseline_wer, double system_wer,
                                  double *werr);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // RESCORE_RESCORE_H_
