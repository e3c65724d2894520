// tests/capi/test_capi.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "rescore/rescore.h"

namespace fs = std::filesystem;

namespace {

std::string Take(char *s) {
  std::string out = s ? s : "";
  rs_string_free(s);
  return out;
}

std::string Config(const fs::path &out) {
  return R"({"out": ")" + out.string() + R"(",
    "corpus": {"train_count": 60, "dev_count": 20, "test_count": 20, "adapt_count": 100},
    "model": {"d_model": 16, "n_layers": 1, "n_heads": 2, "d_ff": 32},
    "adapt": {"max_steps": 4, "eval_every": 2}})";
}

void CountLines(const char *line, void *user) {
  (void)line;
  ++*static_cast<int *>(user);
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(rs_status_name(RS_OK)) == "ok");
  CHECK(std::string(rs_status_name(RS_ERR_PARSE)) == "parse");
  CHECK(std::string(rs_version()).size() > 0);
  rs_model *m = nullptr;
  CHECK(rs_model_load("/nonexistent.ckpt", "causal_ll", 0, 0, &m) == RS_ERR_USAGE);
  CHECK(m == nullptr);
  CHECK(std::string(rs_last_error()).find("nonexistent") != std::string::npos);
  CHECK(rs_model_load(nullptr, "causal_ll", 0, 0, &m) == RS_ERR_USAGE);
  rs_nbest_set *set = nullptr;
  CHECK(rs_nbest_read("/nonexistent.jsonl", &set) == RS_ERR_USAGE);
  char *out = nullptr;
  CHECK(rs_config_resolve("{\"bogus\": 1}", &out) == RS_ERR_CONFIG);
  CHECK(rs_config_resolve("{bad", &out) == RS_ERR_PARSE);
  CHECK(rs_run_stage("nope", "{}", 0, nullptr, nullptr, &out) == RS_ERR_USAGE);
}

TEST_CASE("metrics") {
  size_t d = 99;
  CHECK(rs_edit_distance("a x c", "A b c.", &d) == RS_OK);
  CHECK(d == 1);
  double werr = 0;
  CHECK(rs_relative_werr(5.67, 4.77, &werr) == RS_OK);
  CHECK(std::abs(werr - 15.87) < 5e-3);
  CHECK(rs_relative_werr(0.0, 1.0, &werr) == RS_ERR_CONTRACT);
}

TEST_CASE("stages, models and n-best sets") {
  fs::path out = fs::temp_directory_path() / "rescore_capi_run";
  fs::remove_all(out);
  const std::string cfg = Config(out);
  char *resolved = nullptr;
  REQUIRE(rs_config_resolve(cfg.c_str(), &resolved) == RS_OK);
  CHECK(Take(resolved).find("\"train_count\": 60") != std::string::npos);

  int lines = 0;
  char *summary = nullptr;
  REQUIRE(rs_run_stage("gen", cfg.c_str(), 0, CountLines, &lines, &summary) == RS_OK);
  CHECK(Take(summary).find("\"stage\": \"gen\"") != std::string::npos);
  REQUIRE(rs_run_stage("adapt", cfg.c_str(), 0, CountLines, &lines, &summary) == RS_OK);
  rs_string_free(summary);
  CHECK(lines > 0);

  rs_model *model = nullptr;
  const std::string ckpt = (out / "adapt" / "causal" / "best.ckpt").string();
  REQUIRE(rs_model_load(ckpt.c_str(), "causal_ll", 0, 0, &model) == RS_OK);
  rs_model *wrong = nullptr;
  CHECK(rs_model_load(ckpt.c_str(), "bidirectional_pll", 0, 0, &wrong) == RS_ERR_CONFIG);
  char *info = nullptr;
  REQUIRE(rs_model_info(model, &info) == RS_OK);
  CHECK(Take(info).find("parameters") != std::string::npos);

  rs_nbest_set *set = nullptr;
  const std::string dev = (out / "gen" / "dev.nbest.jsonl").string();
  REQUIRE(rs_nbest_read(dev.c_str(), &set) == RS_OK);
  CHECK(rs_nbest_size(set) == 20);
  size_t idx = 0;
  CHECK(rs_nbest_selected(set, 0, &idx) == RS_ERR_CONTRACT);

  rs_model_reset_forward_count(model);
  REQUIRE(rs_nbest_rescore(set, model, 0.0, 1) == RS_OK);
  CHECK(rs_model_forward_count(model) == 200);
  CHECK(rs_nbest_selected(set, 0, &idx) == RS_OK);
  CHECK(idx < 10);
  CHECK(rs_nbest_selected(set, 20, &idx) == RS_ERR_USAGE);

  double first = 0, rescored = 0, oracle = 0;
  CHECK(rs_nbest_wer(set, RS_SELECT_FIRST_PASS, &first) == RS_OK);
  CHECK(rs_nbest_wer(set, RS_SELECT_RESCORED, &rescored) == RS_OK);
  CHECK(rs_nbest_wer(set, RS_SELECT_ORACLE, &oracle) == RS_OK);
  CHECK(oracle <= first);
  CHECK(oracle <= rescored);

  const std::vector<const char *> texts = {"", "x y"};
  double single = 0, scores[2];
  REQUIRE(rs_model_score(model, "x y", &single) == RS_OK);
  REQUIRE(rs_model_score_batch(model, texts.data(), 2, scores) == RS_OK);
  CHECK(scores[1] == single);
  CHECK(std::isfinite(scores[0]));
  CHECK(rs_model_score(model, nullptr, &single) == RS_ERR_USAGE);

  const std::string written = (out / "rescored.jsonl").string();
  CHECK(rs_nbest_write(set, written.c_str()) == RS_OK);
  rs_nbest_set *back = nullptr;
  REQUIRE(rs_nbest_read(written.c_str(), &back) == RS_OK);
  size_t back_idx = 99;
  CHECK(rs_nbest_selected(back, 0, &back_idx) == RS_OK);
  CHECK(rs_nbest_selected(set, 0, &idx) == RS_OK);
  CHECK(back_idx == idx);

  char *bench = nullptr;
  REQUIRE(rs_model_bench(model, "{\"iters\": 1, \"warmup\": 0, \"seq_len\": 8}", &bench) == RS_OK);
  CHECK(Take(bench).find("\"forward_pass_count\": 10") != std::string::npos);

  rs_nbest_free(back);
  rs_nbest_free(set);
  rs_model_free(model);
  rs_model_free(nullptr);
  rs_nbest_free(nullptr);
}
