// training/recipe.h

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

#ifndef RESCORE_TRAINING_RECIPE_H_
#define RESCORE_TRAINING_RECIPE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "common/json.h"
#include "loss/loss.h"

namespace rescore {
namespace training {

enum class Phase { kAdapt, kMwer };
enum class LrSchedule { kConstant, kLinearDecay };

const char *PhaseName(Phase p);
const char *LrScheduleName(LrSchedule s);
LrSchedule ParseLrSchedule(const std::string &s);

struct TrainRecipe {
  Phase phase = Phase::kAdapt;
  std::size_t batch_size = 16;  // sentences (adapt) or utterances (mwer)
  double lr_init = 1e-5;
  LrSchedule lr_schedule = LrSchedule::kLinearDecay;
  std::size_t max_steps = 1000;
  std::size_t eval_every = 250;
  loss::LossConfig loss;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Global gradient-norm clip; 0 disables it.
  double max_grad_norm = 0.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Defaults for each phase: batch 16 with CE for adaptation, batch 4 with
// MWER for fine-tuning, lr 1e-5 with linear decay for both.
TrainRecipe DefaultRecipe(Phase phase);

Json ToJson(const TrainRecipe &r);
TrainRecipe RecipeFromJson(const Json &j, Phase phase);
// Keys missing from `j` keep the value in `defaults`.
TrainRecipe RecipeFromJson(const Json &j, const TrainRecipe &defaults);

// Learning rate used for the update that completes step `step` (0-based).
double LearningRate(const TrainRecipe &r, std::size_t step);

struct CheckpointRecord {
  std::size_t step = 0;
  double dev_metric = 0.0;
  std::string path;
  bool is_best = false;
};

Json ToJson(const CheckpointRecord &r);
CheckpointRecord CheckpointRecordFromJson(const Json &j);

// Minimum dev_metric, earliest step on ties. Records must be non-empty.
const CheckpointRecord &SelectCheckpoint(const std::vector<CheckpointRecord> &records);

// Sets is_best on the selected record only.
void MarkBest(std::vector<CheckpointRecord> &records);

}  // namespace training
}  // namespace rescore

#endif  // RESCORE_TRAINING_RECIPE_H_
