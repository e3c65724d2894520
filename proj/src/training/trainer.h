// training/trainer.h

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

#ifndef RESCORE_TRAINING_TRAINER_H_
#define RESCORE_TRAINING_TRAINER_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "common/rng.h"
#include "diffcore/tensor.h"
#include "model/transformer.h"
#include "scoring/nbest.h"
#include "scoring/scorer.h"
#include "training/recipe.h"

namespace rescore {
namespace training {

struct RunOptions {
  // Receives step-NNNNNN.ckpt, best.ckpt, last.ckpt and metrics.jsonl.
  // Record paths are relative to it.
  // Empty keeps everything in memory.
  std::string out_dir;
  int threads = 1;
  // Continue from out_dir/last.ckpt when it exists.
  bool resume = false;
  // Progress lines; null discards them.
  std::function<void(const std::string &)> log;
};

struct TrainResult {
  std::vector<CheckpointRecord> records;
  CheckpointRecord best;
  std::size_t steps = 0;
  std::size_t skipped_items = 0;
  // Training loss of every step, in order.
  std::vector<double> losses;
};

// Loss of one training item for the model a worker holds. nullopt skips
// the item.
using ItemLossFn = std::function<std::optional<diff::Tensor>(
    const model::Model &model, std::size_t item, std::size_t step, Rng &rng)>;
using EvalFn = std::function<double(const model::Model &model)>;

// Mini-batch Adam over `num_items` items. Batches walk seeded per-epoch
// permutations; item gradients are computed on worker copies of the
// parameters and summed in batch order, so results depend neither on the
// thread count nor on whether the run was resumed. The model is evaluated at
// step 0, every eval_every steps and at max_steps, and ends holding the
// parameters of the selected checkpoint.
TrainResult Train(model::Model &model, const TrainRecipe &recipe,
                  std::size_t num_items, const ItemLossFn &item_loss,
                  const EvalFn &eval, const RunOptions &options);

// Perplexity exp(mean NLL) on dev sentences; bidirectional models use
// masks drawn from `seed`.
double DevPerplexity(const model::Model &model,
                     const std::vector<model::TokenSeq> &dev,
                     std::uint64_t seed, double mask_rate, int threads);

// CE domain adaptation on tokenized sentences, selected by dev perplexity.
TrainResult DomainAdapt(model::Model &model,
                        const std::vector<model::TokenSeq> &train,
                        const std::vector<model::TokenSeq> &dev,
                        const TrainRecipe &recipe, const RunOptions &options);

// Dev WER (fraction) of rescoring with the given scorer family and lambda.
double DevWer(const model::Model &model, scoring::ScorerKind kind,
              const std::vector<scoring::NBestEntry> &dev, double lambda,
              const scoring::ScoringOptions &scoring_options, int threads);

// MWER (or MWER + alpha CE) fine-tuning, selected by dev WER under
// recipe.loss.lambda_train. Utterances whose id starts with "test-" are
// rejected.
TrainResult MwerFinetune(model::Model &model, scoring::ScorerKind kind,
                         const std::vector<scoring::NBestEntry> &train,
                         const std::vector<scoring::NBestEntry> &dev,
                         const TrainRecipe &recipe,
                         const scoring::ScoringOptions &scoring_options,
                         const RunOptions &options);

// Fits the scores of `kind` to per-hypothesis teacher scores with the
// list-centered squared loss, selected by dev WER under
// recipe.loss.lambda_train. teacher[u] holds one score per hypothesis of
// train[u].
TrainResult DistillScores(model::Model &model, scoring::ScorerKind kind,
                          const std::vector<scoring::NBestEntry> &train,
                          const std::vector<std::vector<double>> &teacher,
                          const std::vector<scoring::NBestEntry> &dev,
                          const TrainRecipe &recipe,
                          const scoring::ScoringOptions &scoring_options,
                          const RunOptions &options);

// Throws kUsage for held-out test material.
void RejectTestData(const std::vector<scoring::NBestEntry> &entries,
                    const std::string &what);

}  // namespace training
}  // namespace rescore

#endif  // RESCORE_TRAINING_TRAINER_H_
