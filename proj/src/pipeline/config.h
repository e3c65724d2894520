// pipeline/config.h

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

#ifndef RESCORE_PIPELINE_CONFIG_H_
#define RESCORE_PIPELINE_CONFIG_H_

#include <optional>
#include <string>
#include <vector>

#include "bench/bench.h"
#include "common/json.h"
#include "datagen/channel.h"
#include "datagen/corpus.h"
#include "model/config.h"
#include "scoring/scorer.h"
#include "training/recipe.h"

namespace rescore {
namespace pipeline {

struct ModelSection {
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t max_len = 64;
  double init_std = 0.02;
  std::uint64_t init_seed = 1;
};

struct TuneSection {
  std::vector<double> grid;
};

struct RescoreSection {
  std::string scorer = "causal_ll";
  std::optional<double> lambda;  // unset: the tuned value for the model
  std::string model;             // checkpoint path
  std::string input;             // n-best file
  std::string output;            // rescored n-best file
};

struct EvalSection {
  // Bench report whose latencies fill the latency_ms column.
  std::string bench;
};

struct BenchSection {
  bench::BenchOptions options;
  std::vector<scoring::ScorerKind> scorers;
  // Load the pipeline's trained models instead of fresh ones.
  bool trained_models = false;
};

// Warm start for pooled scorers: before MWER, the score head and body are
// fitted to the likelihood scores of the CE baseline on the first
// `utterances` training lists.
struct DistillSection {
  bool enabled = false;
  std::vector<scoring::ScorerKind> scorers;
  std::size_t utterances = 1000;
  training::TrainRecipe recipe;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "run";
  datagen::CorpusSpec corpus;
  datagen::ChannelConfig channel;
  ModelSection model;
  training::TrainRecipe adapt;
  training::TrainRecipe mwer;
  DistillSection distill;
  TuneSection tune;
  RescoreSection rescore;
  EvalSection eval;
  BenchSection bench;
  scoring::ScoringOptions scoring;
  std::vector<scoring::ScorerKind> scorers;  // pipeline.scorers
};

// Every field has a default and unknown keys are rejected. Section seeds
// default to the global seed.
PipelineConfig ParseConfig(const Json &j);
PipelineConfig LoadConfigFile(const std::string &path);
// Fully resolved; ParseConfig(ToJson(c)) reproduces c.
Json ToJson(const PipelineConfig &c);

model::ModelConfig MakeModelConfig(const PipelineConfig &c, model::Variant v,
                                   std::size_t vocab_size);

}  // namespace pipeline
}  // namespace rescore

#endif  // RESCORE_PIPELINE_CONFIG_H_
