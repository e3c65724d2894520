// loss/loss.h

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

#ifndef RESCORE_LOSS_LOSS_H_
#define RESCORE_LOSS_LOSS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/json.h"
#include "common/rng.h"
#include "diffcore/tensor.h"
#include "metrics/wer.h"
#include "model/transformer.h"
#include "scoring/nbest.h"
#include "scoring/scorer.h"

namespace rescore {
namespace loss {

enum class LossKind { kCe, kMwer, kMwerPlusCe };

const char *LossKindName(LossKind k);
LossKind ParseLossKind(const std::string &s);

struct LossConfig {
  LossKind kind = LossKind::kMwer;
  double alpha = 0.0;         // CE weight for kMwerPlusCe
  double lambda_train = 0.0;  // lambda inside the training posterior
  bool subtract_mean_edit = false;
  double mask_rate = 0.15;    // masked-LM CE only

  void Validate() const;
};

Json ToJson(const LossConfig &c);
LossConfig LossConfigFromJson(const Json &j, LossConfig defaults = {});

struct NBestBatchItem {
  std::string utt_id;
  metrics::Words ref_words;
  std::vector<metrics::Words> hyp_words;
  std::vector<double> am_scores;
  std::vector<double> edits;  // word-level edit distance to the reference
};

NBestBatchItem MakeBatchItem(const scoring::NBestEntry &entry);

// Masked positions per sentence (1-based content positions after CLS). Each
// content position is drawn with probability `rate`; a sentence with none
// drawn gets one uniformly chosen position.
std::vector<std::vector<std::size_t>> SampleMasks(
    std::span<const model::TokenSeq> contents, double rate, Rng &rng);

// Mean token NLL. Causal: next-token prediction over BOS content EOS.
// Bidirectional: prediction of the original token at each masked position
// (`masks` as from SampleMasks; required for that variant).
diff::Tensor CeLoss(const model::ModelConfig &config,
                    const model::ModelParams &params,
                    std::span<const model::TokenSeq> contents,
                    const std::vector<std::vector<std::size_t>> *masks = nullptr);

// Softmax of interpolated scores; [N] or [1 x N] in, [1 x N] out.
diff::Tensor NBestPosterior(const diff::Tensor &interp_scores);

// Expected (optionally mean-subtracted) edit distance under the n-best
// posterior of lm + lambda * am. am_scores enter as constants. Returns
// nullopt for items with fewer than two hypotheses.
std::optional<diff::Tensor> MwerLoss(const NBestBatchItem &item,
                                     std::span<const diff::Tensor> lm_scores,
                                     double lambda, bool subtract_mean_edit);

// mwer + alpha * ce
// Mean squared gap between the list-centered student scores and the
// list-centered teacher scores. nullopt for fewer than two hypotheses.
std::optional<diff::Tensor> DistillLoss(std::span<const diff::Tensor> student,
                                        std::span<const double> teacher);

diff::Tensor CombinedLoss(const diff::Tensor &mwer, const diff::Tensor &ce,
                          double alpha);

// MWER with lm_scores from the given scorer family.
std::optional<diff::Tensor> MwerLossForScorer(
    scoring::ScorerKind kind, const model::Model &model,
    const NBestBatchItem &item, const LossConfig &cfg,
    const scoring::ScoringOptions &options = {},
    scoring::ForwardCounter *counter = nullptr);

// The loss selected by cfg.kind for one n-best item. CE terms use the
// reference transcript; `rng` draws masks for bidirectional CE.
std::optional<diff::Tensor> ItemLoss(scoring::ScorerKind kind,
                                     const model::Model &model,
                                     const NBestBatchItem &item,
                                     const LossConfig &cfg, Rng &rng,
                                     const scoring::ScoringOptions &options = {});

}  // namespace loss
}  // namespace rescore

#endif  // RESCORE_LOSS_LOSS_H_
