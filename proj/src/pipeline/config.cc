// pipeline/config.cc

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

#include "pipeline/config.h"

#include <fstream>
#include <sstream>

#include "common/error.h"
#include "training/tuning.h"

namespace rescore {
namespace pipeline {

namespace {

// Keys of `j` must appear in `reference`; nested objects are checked too.
void CheckKeys(const Json &j, const Json &reference, const std::string &where) {
  if (!j.is_object())
    Fail(ErrorKind::kConfig, "config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!reference.contains(it.key()))
      Fail(ErrorKind::kConfig, "config: unknown key '" + path + "'");
    const Json &ref = reference[it.key()];
    if (ref.is_object() && it.value().is_object())
      CheckKeys(it.value(), ref, path);
  }
}

std::vector<scoring::ScorerKind> ParseKinds(const Json &j) {
  std::vector<scoring::ScorerKind> kinds;
  for (const auto &s : j) kinds.push_back(scoring::ParseScorerKind(s.get<std::string>()));
  if (kinds.empty()) Fail(ErrorKind::kConfig, "config: empty scorer list");
  return kinds;
}

Json KindsToJson(const std::vector<scoring::ScorerKind> &kinds) {
  Json j = Json::array();
  for (auto k : kinds) j.push_back(scoring::ScorerKindName(k));
  return j;
}

Json ToJson(const ModelSection &m) {
  return {{"d_model", m.d_model},   {"n_layers", m.n_layers},
          {"n_heads", m.n_heads},   {"d_ff", m.d_ff},
          {"max_len", m.max_len},   {"init_std", m.init_std},
          {"init_seed", m.init_seed}};
}

Json ToJson(const RescoreSection &r) {
  Json j;
  j["scorer"] = r.scorer;
  j["lambda"] = r.lambda ? Json(*r.lambda) : Json(nullptr);
  j["model"] = r.model;
  j["input"] = r.input;
  j["output"] = r.output;
  return j;
}

// Defaults before the file is applied. Section seeds follow the global one.
PipelineConfig Defaults(std::uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  c.corpus.seed = seed;
  c.channel.seed = seed;
  c.model.init_seed = seed;

  c.adapt = training::DefaultRecipe(training::Phase::kAdapt);
  c.adapt.lr_init = 1e-3;
  c.adapt.max_steps = 1000;
  c.adapt.eval_every = 250;
  c.adapt.seed = seed;

  c.mwer = training::DefaultRecipe(training::Phase::kMwer);
  c.mwer.lr_init = 1e-4;
  c.mwer.seed = seed;

  c.distill.recipe = training::DefaultRecipe(training::Phase::kMwer);
  c.distill.recipe.lr_init = 1e-3;
  c.distill.recipe.max_steps = 500;
  c.distill.recipe.seed = seed;

  c.tune.grid = training::DefaultLambdaGrid();
  c.bench.options.seed = seed;
  c.bench.scorers.assign(std::begin(scoring::kAllScorerKinds),
                         std::end(scoring::kAllScorerKinds));
  c.scorers = c.bench.scorers;
  c.distill.scorers = {scoring::ScorerKind::kPooledCls, scoring::ScorerKind::kPooledLast,
                       scoring::ScorerKind::kPooledAttention};
  return c;
}

}  // namespace

Json ToJson(const PipelineConfig &c) {
  Json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["corpus"] = datagen::ToJson(c.corpus);
  j["channel"] = datagen::ToJson(c.channel);
  j["model"] = ToJson(c.model);
  j["adapt"] = training::ToJson(c.adapt);
  j["mwer"] = training::ToJson(c.mwer);
  j["distill"] = {{"enabled", c.distill.enabled},
                  {"scorers", KindsToJson(c.distill.scorers)},
                  {"utterances", c.distill.utterances},
                  {"recipe", training::ToJson(c.distill.recipe)}};
  j["tune"] = {{"grid", c.tune.grid}};
  j["rescore"] = ToJson(c.rescore);
  j["eval"] = {{"bench", c.eval.bench}};
  Json b = bench::ToJson(c.bench.options);
  b["scorers"] = KindsToJson(c.bench.scorers);
  b["trained_models"] = c.bench.trained_models;
  j["bench"] = b;
  j["scoring"] = {{"paper_literal_pll_sign", c.scoring.paper_literal_pll_sign},
                  {"length_normalize", c.scoring.length_normalize}};
  j["pipeline"] = {{"scorers", KindsToJson(c.scorers)}};
  return j;
}

PipelineConfig ParseConfig(const Json &j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "config: top level must be an object");
  PipelineConfig c;
  try {
    c = Defaults(j.value("seed", std::uint64_t{1}));
    CheckKeys(j, ToJson(c), "");
    c.threads = j.value("threads", c.threads);
    c.out = j.value("out", c.out);
    if (j.contains("corpus")) c.corpus = datagen::CorpusSpecFromJson(j["corpus"], c.corpus);
    if (j.contains("channel"))
      c.channel = datagen::ChannelConfigFromJson(j["channel"], c.channel);
    if (j.contains("model")) {
      const Json &m = j["model"];
      c.model.d_model = m.value("d_model", c.model.d_model);
      c.model.n_layers = m.value("n_layers", c.model.n_layers);
      c.model.n_heads = m.value("n_heads", c.model.n_heads);
      c.model.d_ff = m.value("d_ff", c.model.d_ff);
      c.model.max_len = m.value("max_len", c.model.max_len);
      c.model.init_std = m.value("init_std", c.model.init_std);
      c.model.init_seed = m.value("init_seed", c.model.init_seed);
    }
    if (j.contains("adapt")) c.adapt = training::RecipeFromJson(j["adapt"], c.adapt);
    if (j.contains("mwer")) c.mwer = training::RecipeFromJson(j["mwer"], c.mwer);
    if (j.contains("distill")) {
      const Json &d = j["distill"];
      c.distill.enabled = d.value("enabled", c.distill.enabled);
      if (d.contains("scorers")) c.distill.scorers = ParseKinds(d["scorers"]);
      c.distill.utterances = d.value("utterances", c.distill.utterances);
      if (d.contains("recipe"))
        c.distill.recipe = training::RecipeFromJson(d["recipe"], c.distill.recipe);
    }
    if (j.contains("tune"))
      c.tune.grid = j["tune"].value("grid", c.tune.grid);
    if (j.contains("rescore")) {
      const Json &r = j["rescore"];
      c.rescore.scorer = r.value("scorer", c.rescore.scorer);
      if (r.contains("lambda") && !r["lambda"].is_null())
        c.rescore.lambda = r["lambda"].get<double>();
      c.rescore.model = r.value("model", c.rescore.model);
      c.rescore.input = r.value("input", c.rescore.input);
      c.rescore.output = r.value("output", c.rescore.output);
    }
    if (j.contains("eval")) c.eval.bench = j["eval"].value("bench", c.eval.bench);
    if (j.contains("bench")) {
      const Json &b = j["bench"];
      c.bench.options = bench::BenchOptionsFromJson(b, c.bench.options);
      if (b.contains("scorers")) c.bench.scorers = ParseKinds(b["scorers"]);
      c.bench.trained_models = b.value("trained_models", c.bench.trained_models);
    }
    if (j.contains("scoring")) {
      const Json &s = j["scoring"];
      c.scoring.paper_literal_pll_sign =
          s.value("paper_literal_pll_sign", c.scoring.paper_literal_pll_sign);
      c.scoring.length_normalize =
          s.value("length_normalize", c.scoring.length_normalize);
    }
    if (j.contains("pipeline") && j["pipeline"].contains("scorers"))
      c.scorers = ParseKinds(j["pipeline"]["scorers"]);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kConfig, std::string("config: ") + e.what());
  }

  if (c.threads < 1) Fail(ErrorKind::kConfig, "config: threads must be >= 1");
  if (c.out.empty()) Fail(ErrorKind::kConfig, "config: out must be set");
  if (c.tune.grid.empty()) Fail(ErrorKind::kConfig, "config: tune.grid is empty");
  for (double g : c.tune.grid)
    if (!(g >= 0.0)) Fail(ErrorKind::kConfig, "config: tune.grid values must be >= 0");
  if (c.rescore.lambda && !(*c.rescore.lambda >= 0.0))
    Fail(ErrorKind::kConfig, "config: rescore.lambda must be >= 0");
  scoring::ParseScorerKind(c.rescore.scorer);
  c.adapt.phase = training::Phase::kAdapt;
  c.mwer.phase = training::Phase::kMwer;
  c.adapt.Validate();
  c.mwer.Validate();
  c.distill.recipe.phase = training::Phase::kMwer;
  c.distill.recipe.Validate();
  for (auto k : c.distill.scorers)
    if (!scoring::IsPooled(k))
      Fail(ErrorKind::kConfig, std::string("config: distill.scorers: '") +
                                   scoring::ScorerKindName(k) + "' is not a pooled scorer");
  if (c.distill.enabled && c.distill.utterances == 0)
    Fail(ErrorKind::kConfig, "config: distill.utterances must be > 0");
  if (c.corpus.max_len > c.model.max_len)
    Fail(ErrorKind::kConfig, "config: corpus.max_len exceeds model.max_len");
  MakeModelConfig(c, model::Variant::kCausal, 16).Validate();
  return c;
}

PipelineConfig LoadConfigFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kUsage, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, path + ": " + e.what());
  }
  return ParseConfig(j);
}

model::ModelConfig MakeModelConfig(const PipelineConfig &c, model::Variant v,
                                   std::size_t vocab_size) {
  model::ModelConfig m;
  m.vocab_size = vocab_size;
  m.d_model = c.model.d_model;
  m.n_layers = c.model.n_layers;
  m.n_heads = c.model.n_heads;
  m.d_ff = c.model.d_ff;
  m.max_len = c.model.max_len;
  m.variant = v;
  m.init_std = c.model.init_std;
  m.init_seed = c.model.init_seed;
  return m;
}

}  // namespace pipeline
}  // namespace rescore
