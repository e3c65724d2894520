// capi/rescore_capi.cc

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

#include "rescore/rescore.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "bench/bench.h"
#include "common/error.h"
#include "metrics/text.h"
#include "metrics/wer.h"
#include "model/checkpoint.h"
#include "model/params.h"
#include "pipeline/config.h"
#include "pipeline/stages.h"
#include "scoring/nbest.h"
#include "scoring/rescore.h"
#include "scoring/scorer.h"

using namespace rescore;

struct rs_model {
  std::unique_ptr<scoring::Scorer> scorer;
};

struct rs_nbest_set {
  std::vector<scoring::NBestEntry> entries;
};

namespace {

thread_local std::string last_error;

rs_status StatusOf(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return RS_ERR_USAGE;
    case ErrorKind::kContract: return RS_ERR_CONTRACT;
    case ErrorKind::kDimension: return RS_ERR_DIMENSION;
    case ErrorKind::kLength: return RS_ERR_LENGTH;
    case ErrorKind::kVocab: return RS_ERR_VOCAB;
    case ErrorKind::kConfig: return RS_ERR_CONFIG;
    case ErrorKind::kEmptyInput: return RS_ERR_EMPTY_INPUT;
    case ErrorKind::kParse: return RS_ERR_PARSE;
    case ErrorKind::kIo: return RS_ERR_IO;
    case ErrorKind::kNumeric: return RS_ERR_NUMERIC;
  }
  return RS_ERR_INTERNAL;
}

template <typename F>
rs_status Guard(F &&f) {
  last_error.clear();
  try {
    f();
    return RS_OK;
  } catch (const Error &e) {
    last_error = e.what();
    return StatusOf(e.kind());
  } catch (const nlohmann::json::exception &e) {
    last_error = std::string("json: ") + e.what();
    return RS_ERR_PARSE;
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
    return RS_ERR_INTERNAL;
  } catch (const std::exception &e) {
    last_error = e.what();
    return RS_ERR_INTERNAL;
  }
}

void Require(bool ok, const char *what) {
  if (!ok) Fail(ErrorKind::kUsage, std::string(what) + " must not be NULL");
}

char *Dup(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

Json ParseConfigText(const char *text) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, std::string("config: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char *rs_status_name(rs_status status) {
  switch (status) {
    case RS_OK: return "ok";
    case RS_ERR_USAGE: return "usage";
    case RS_ERR_CONTRACT: return "contract";
    case RS_ERR_DIMENSION: return "dimension";
    case RS_ERR_LENGTH: return "length";
    case RS_ERR_VOCAB: return "vocab";
    case RS_ERR_CONFIG: return "config";
    case RS_ERR_EMPTY_INPUT: return "empty_input";
    case RS_ERR_PARSE: return "parse";
    case RS_ERR_IO: return "io";
    case RS_ERR_NUMERIC: return "numeric";
    case RS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *rs_last_error(void) { return last_error.c_str(); }

const char *rs_version(void) { return "0.1.0"; }

void rs_string_free(char *s) { std::free(s); }

rs_status rs_config_resolve(const char *config_json, char **resolved_json) {
  return Guard([&] {
    Require(resolved_json, "resolved_json");
    *resolved_json = nullptr;
    auto c = pipeline::ParseConfig(ParseConfigText(config_json));
    *resolved_json = Dup(pipeline::ToJson(c).dump(2));
  });
}

rs_status rs_run_stage(const char *stage, const char *config_json, int resume,
                       rs_log_fn log, void *user, char **summary_json) {
  return Guard([&] {
    Require(stage, "stage");
    if (summary_json) *summary_json = nullptr;
    auto c = pipeline::ParseConfig(ParseConfigText(config_json));
    pipeline::StageOptions o;
    o.resume = resume != 0;
    if (log) o.log = [log, user](const std::string &s) { log(s.c_str(), user); };
    Json summary = pipeline::RunStage(stage, c, o);
    if (summary_json) *summary_json = Dup(summary.dump(2));
  });
}

rs_status rs_model_load(const char *checkpoint_path, const char *scorer_kind,
                        int paper_literal_pll_sign, int length_normalize,
                        rs_model **out) {
  return Guard([&] {
    Require(checkpoint_path, "checkpoint_path");
    Require(scorer_kind, "scorer_kind");
    Require(out, "out");
    *out = nullptr;
    auto kind = scoring::ParseScorerKind(scorer_kind);
    auto m = std::make_shared<const model::Model>(model::LoadModel(checkpoint_path));
    scoring::ScoringOptions opts;
    opts.paper_literal_pll_sign = paper_literal_pll_sign != 0;
    opts.length_normalize = length_normalize != 0;
    auto handle = std::make_unique<rs_model>();
    handle->scorer = std::make_unique<scoring::Scorer>(kind, m, opts);
    *out = handle.release();
  });
}

void rs_model_free(rs_model *model) { delete model; }

rs_status rs_model_info(const rs_model *model, char **info_json) {
  return Guard([&] {
    Require(model, "model");
    Require(info_json, "info_json");
    const auto &m = model->scorer->model();
    Json j;
    j["scorer"] = scoring::ScorerKindName(model->scorer->kind());
    j["config"] = model::ToJson(m.config);
    j["parameters"] = m.params.ParameterCount();
    j["analytic_parameters"] = model::AnalyticParameterCount(m.config);
    *info_json = Dup(j.dump(2));
  });
}

rs_status rs_model_score(const rs_model *model, const char *text, double *score) {
  return Guard([&] {
    Require(model, "model");
    Require(text, "text");
    Require(score, "score");
    *score = model->scorer->ScoreText(text);
  });
}

rs_status rs_model_score_batch(const rs_model *model, const char *const *texts,
                               size_t n, double *scores) {
  return Guard([&] {
    Require(model, "model");
    Require(texts || n == 0, "texts");
    Require(scores || n == 0, "scores");
    std::vector<std::string> v;
    for (size_t i = 0; i < n; ++i) {
      Require(texts[i], "texts[i]");
      v.emplace_back(texts[i]);
    }
    auto s = model->scorer->ScoreTexts(v);
    std::copy(s.begin(), s.end(), scores);
  });
}

uint64_t rs_model_forward_count(const rs_model *model) {
  return model ? model->scorer->forward_count() : 0;
}

void rs_model_reset_forward_count(rs_model *model) {
  if (model) model->scorer->ResetForwardCount();
}

rs_status rs_model_bench(const rs_model *model, const char *options_json,
                         char **result_json) {
  return Guard([&] {
    Require(model, "model");
    Require(result_json, "result_json");
    auto opts = bench::BenchOptionsFromJson(ParseConfigText(options_json));
    *result_json = Dup(bench::ToJson(bench::RunBench(*model->scorer, opts)).dump(2));
  });
}

rs_status rs_nbest_read(const char *path, rs_nbest_set **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    auto set = std::make_unique<rs_nbest_set>();
    set->entries = scoring::ReadNBestFile(path);
    *out = set.release();
  });
}

void rs_nbest_free(rs_nbest_set *set) { delete set; }

size_t rs_nbest_size(const rs_nbest_set *set) {
  return set ? set->entries.size() : 0;
}

rs_status rs_nbest_rescore(rs_nbest_set *set, const rs_model *model,
                           double lambda, int threads) {
  return Guard([&] {
    Require(set, "set");
    Require(model, "model");
    auto scores = scoring::ScoreCorpus(*model->scorer, set->entries, threads < 1 ? 1 : threads);
    set->entries = scoring::Annotate(set->entries, scores, lambda);
  });
}

rs_status rs_nbest_selected(const rs_nbest_set *set, size_t i, size_t *index) {
  return Guard([&] {
    Require(set, "set");
    Require(index, "index");
    if (i >= set->entries.size())
      Fail(ErrorKind::kUsage, "utterance index out of range");
    if (!set->entries[i].selected)
      Fail(ErrorKind::kContract, "n-best set has not been rescored");
    *index = *set->entries[i].selected;
  });
}

rs_status rs_nbest_write(const rs_nbest_set *set, const char *path) {
  return Guard([&] {
    Require(set, "set");
    Require(path, "path");
    scoring::WriteNBestFile(path, set->entries);
  });
}

rs_status rs_nbest_wer(const rs_nbest_set *set, rs_selection which,
                       double *wer_percent) {
  return Guard([&] {
    Require(set, "set");
    Require(wer_percent, "wer_percent");
    const auto &e = set->entries;
    metrics::WerReport r;
    if (which == RS_SELECT_FIRST_PASS) {
      r = scoring::SelectionWer(e, scoring::FirstPassSelections(e));
    } else if (which == RS_SELECT_RESCORED) {
      std::vector<std::size_t> sel;
      for (const auto &x : e) {
        if (!x.selected) Fail(ErrorKind::kContract, "n-best set has not been rescored");
        sel.push_back(*x.selected);
      }
      r = scoring::SelectionWer(e, sel);
    } else if (which == RS_SELECT_ORACLE) {
      r = scoring::OracleWer(e);
    } else {
      Fail(ErrorKind::kUsage, "unknown selection");
    }
    *wer_percent = 100.0 * r.wer;
  });
}

rs_status rs_edit_distance(const char *hyp, const char *ref, size_t *distance) {
  return Guard([&] {
    Require(hyp, "hyp");
    Require(ref, "ref");
    Require(distance, "distance");
    *distance = metrics::EditDistance(metrics::NormalizedWords(hyp),
                                      metrics::NormalizedWords(ref))
                    .distance;
  });
}

rs_status rs_relative_werr(double baseline_wer, double system_wer, double *werr) {
  return Guard([&] {
    Require(werr, "werr");
    *werr = metrics::RelativeWerr(baseline_wer, system_wer);
  });
}

}  // extern "C"
