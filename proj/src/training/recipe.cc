// training/recipe.cc

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

#include "training/recipe.h"

#include <algorithm>

#include "common/error.h"

namespace rescore {
namespace training {

const char *PhaseName(Phase p) { return p == Phase::kAdapt ? "adapt" : "mwer"; }

const char *LrScheduleName(LrSchedule s) {
  return s == LrSchedule::kConstant ? "constant" : "linear_decay";
}

LrSchedule ParseLrSchedule(const std::string &s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "linear_decay") return LrSchedule::kLinearDecay;
  Fail(ErrorKind::kConfig, "unknown lr_schedule '" + s + "'");
}

void TrainRecipe::Validate() const {
  if (batch_size == 0) Fail(ErrorKind::kConfig, "batch_size must be >= 1");
  if (!(lr_init > 0.0)) Fail(ErrorKind::kConfig, "lr_init must be > 0");
  if (eval_every == 0) Fail(ErrorKind::kConfig, "eval_every must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 &&
        adam_beta2 < 1.0 && adam_eps > 0.0))
    Fail(ErrorKind::kConfig, "invalid Adam hyper-parameters");
  if (!(max_grad_norm >= 0.0)) Fail(ErrorKind::kConfig, "max_grad_norm must be >= 0");
  if (phase == Phase::kAdapt && loss.kind != loss::LossKind::kCe)
    Fail(ErrorKind::kConfig, "domain adaptation trains with the ce loss");
  if (phase == Phase::kMwer && loss.kind == loss::LossKind::kCe)
    Fail(ErrorKind::kConfig, "MWER fine-tuning needs loss kind mwer or mwer_plus_ce");
  loss.Validate();
}

TrainRecipe DefaultRecipe(Phase phase) {
  TrainRecipe r;
  r.phase = phase;
  if (phase == Phase::kAdapt) {
    r.batch_size = 16;
    r.loss.kind = loss::LossKind::kCe;
  } else {
    r.batch_size = 4;
    r.loss.kind = loss::LossKind::kMwer;
    r.max_steps = 300;
    r.eval_every = 100;
  }
  return r;
}

Json ToJson(const TrainRecipe &r) {
  Json j;
  j["phase"] = PhaseName(r.phase);
  j["batch_size"] = r.batch_size;
  j["lr_init"] = r.lr_init;
  j["lr_schedule"] = LrScheduleName(r.lr_schedule);
  j["max_steps"] = r.max_steps;
  j["eval_every"] = r.eval_every;
  j["loss"] = loss::ToJson(r.loss);
  j["optimizer"] = {{"name", "adam"},
                    {"beta1", r.adam_beta1},
                    {"beta2", r.adam_beta2},
                    {"eps", r.adam_eps}};
  j["max_grad_norm"] = r.max_grad_norm;
  j["seed"] = r.seed;
  return j;
}

TrainRecipe RecipeFromJson(const Json &j, Phase phase) {
  return RecipeFromJson(j, DefaultRecipe(phase));
}

TrainRecipe RecipeFromJson(const Json &j, const TrainRecipe &defaults) {
  TrainRecipe r = defaults;
  r.batch_size = j.value("batch_size", r.batch_size);
  r.lr_init = j.value("lr_init", r.lr_init);
  if (j.contains("lr_schedule"))
    r.lr_schedule = ParseLrSchedule(j["lr_schedule"].get<std::string>());
  r.max_steps = j.value("max_steps", r.max_steps);
  r.eval_every = j.value("eval_every", r.eval_every);
  if (j.contains("loss")) r.loss = loss::LossConfigFromJson(j["loss"], r.loss);
  if (j.contains("optimizer")) {
    const Json &o = j["optimizer"];
    r.adam_beta1 = o.value("beta1", r.adam_beta1);
    r.adam_beta2 = o.value("beta2", r.adam_beta2);
    r.adam_eps = o.value("eps", r.adam_eps);
  }
  r.max_grad_norm = j.value("max_grad_norm", r.max_grad_norm);
  r.seed = j.value("seed", r.seed);
  r.Validate();
  return r;
}

double LearningRate(const TrainRecipe &r, std::size_t step) {
  if (r.lr_schedule == LrSchedule::kConstant || r.max_steps == 0) return r.lr_init;
  const double frac = static_cast<double>(step) / static_cast<double>(r.max_steps);
  return r.lr_init * std::max(0.0, 1.0 - frac);
}

Json ToJson(const CheckpointRecord &r) {
  return {{"step", r.step}, {"dev_metric", r.dev_metric}, {"path", r.path},
          {"is_best", r.is_best}};
}

CheckpointRecord CheckpointRecordFromJson(const Json &j) {
  CheckpointRecord r;
  r.step = j.at("step").get<std::size_t>();
  r.dev_metric = j.at("dev_metric").get<double>();
  r.path = j.value("path", "");
  r.is_best = j.value("is_best", false);
  return r;
}

const CheckpointRecord &SelectCheckpoint(const std::vector<CheckpointRecord> &records) {
  if (records.empty()) Fail(ErrorKind::kEmptyInput, "select_checkpoint: no records");
  const CheckpointRecord *best = &records.front();
  for (const auto &r : records)
    if (r.dev_metric < best->dev_metric ||
        (r.dev_metric == best->dev_metric && r.step < best->step))
      best = &r;
  return *best;
}

void MarkBest(std::vector<CheckpointRecord> &records) {
  if (records.empty()) return;
  const CheckpointRecord *best = &SelectCheckpoint(records);
  for (auto &r : records) r.is_best = &r == best;
}

}  // namespace training
}  // namespace rescore
