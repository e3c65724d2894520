// pipeline/stages.h

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

#ifndef RESCORE_PIPELINE_STAGES_H_
#define RESCORE_PIPELINE_STAGES_H_

#include <functional>
#include <string>
#include <vector>

#include "common/json.h"
#include "pipeline/config.h"

namespace rescore {
namespace pipeline {

// Run directory layout, relative to config.out:
//
//   gen/      {train,dev,test}.nbest.jsonl, adapt.txt, dev.txt, lexicon.txt
//   adapt/    <variant>/{step-NNNNNN,best,last}.ckpt + metrics.jsonl
//   mwer/     <scorer>/{step-NNNNNN,best,last}.ckpt + metrics.jsonl, and
//             <scorer>/distill/ with the same files when warm-started
//   tune/     <system>.json
//   rescore/  rescored n-best files
//   eval/     report.txt, <system>.test.nbest.jsonl
//   bench/
//
// Every stage directory also holds config.json (the resolved config),
// metrics.jsonl and report.json. Reports carry no timings or absolute
// paths, so equal configs give byte-identical reports.

using LogFn = std::function<void(const std::string &)>;

struct StageOptions {
  // Continue interrupted training runs from their last.ckpt.
  bool resume = false;
  LogFn log;
};

// A trained scorer: CE baselines are "<kind>.ce", fine-tuned models
// "<kind>.mwer".
struct System {
  scoring::ScorerKind kind;
  std::string loss;        // "ce" or "mwer"
  std::string checkpoint;  // relative to config.out
  std::string name() const;
};

// The likelihood baselines for every variant the configured scorers need,
// followed by one MWER system per scorer.
std::vector<System> Systems(const PipelineConfig &config);
// The likelihood scorer that serves as the CE baseline of `kind`'s variant.
scoring::ScorerKind BaselineKind(scoring::ScorerKind kind);

Json RunGen(const PipelineConfig &config, const StageOptions &options);
Json RunAdapt(const PipelineConfig &config, const StageOptions &options);
Json RunMwer(const PipelineConfig &config, const StageOptions &options);
Json RunTune(const PipelineConfig &config, const StageOptions &options);
Json RunRescore(const PipelineConfig &config, const StageOptions &options);
Json RunEval(const PipelineConfig &config, const StageOptions &options);
Json RunBenchStage(const PipelineConfig &config, const StageOptions &options);
// gen, adapt, baseline tuning, mwer, tune, eval.
Json RunPipeline(const PipelineConfig &config, const StageOptions &options);

// Dispatch by name; unknown names are usage errors.
Json RunStage(const std::string &name, const PipelineConfig &config,
              const StageOptions &options);
const std::vector<std::string> &StageNames();

}  // namespace pipeline
}  // namespace rescore

#endif  // RESCORE_PIPELINE_STAGES_H_
