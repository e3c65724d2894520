// scoring/scorer.h

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

#ifndef RESCORE_SCORING_SCORER_H_
#define RESCORE_SCORING_SCORER_H_

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diffcore/tensor.h"
#include "model/transformer.h"

namespace rescore {
namespace scoring {

enum class ScorerKind {
  kCausalLl,
  kBidirectionalPll,
  kPooledLast,
  kPooledCls,
  kPooledAttention,
};

inline constexpr ScorerKind kAllScorerKinds[] = {
    ScorerKind::kCausalLl, ScorerKind::kBidirectionalPll,
    ScorerKind::kPooledCls, ScorerKind::kPooledLast,
    ScorerKind::kPooledAttention};

const char *ScorerKindName(ScorerKind kind);
ScorerKind ParseScorerKind(const std::string &name);
model::Variant RequiredVariant(ScorerKind kind);
// kNone for the likelihood scorers.
model::Pooling RequiredPooling(ScorerKind kind);
bool IsPooled(ScorerKind kind);
// Throws kConfig unless the model can serve `kind`.
void CheckCompatible(ScorerKind kind, const model::ModelConfig &config,
                     const model::ModelParams &params);

struct ScoringOptions {
  // Negates the PLL so it matches the literal sign of the masked-LM formula.
  bool paper_literal_pll_sign = false;
  // Divides likelihood scores by the number of content tokens.
  bool length_normalize = false;
};

// Counts model evaluations: one per encoded sequence (so a PLL over L
// content tokens costs L).
using ForwardCounter = std::atomic<std::uint64_t>;

// Differentiable LM scores of un-framed content token sequences, one rank-0
// tensor per sequence. Framing tokens are added here.
std::vector<diff::Tensor> ScoreTensors(ScorerKind kind,
                                       const model::ModelConfig &config,
                                       const model::ModelParams &params,
                                       std::span<const model::TokenSeq> contents,
                                       const ScoringOptions &options = {},
                                       ForwardCounter *counter = nullptr);

// log P of the observed tokens for a causal model, framed BOS...EOS.
diff::Tensor CausalLogLikelihood(const model::ModelConfig &config,
                                 const model::ModelParams &params,
                                 const model::TokenSeq &content,
                                 ForwardCounter *counter = nullptr);

// Pseudo-log-likelihood: the L masked copies of [CLS content] are encoded as
// one batch.
diff::Tensor PseudoLogLikelihood(const model::ModelConfig &config,
                                 const model::ModelParams &params,
                                 const model::TokenSeq &content,
                                 ForwardCounter *counter = nullptr);

// Same quantity, one masked copy at a time.
diff::Tensor PseudoLogLikelihoodLoop(const model::ModelConfig &config,
                                     const model::ModelParams &params,
                                     const model::TokenSeq &content,
                                     ForwardCounter *counter = nullptr);

// sum_r logp[r, targets[r]] over a [R x V] matrix of log-probabilities.
diff::Tensor PickSum(const diff::Tensor &log_probs,
                     std::span<const model::TokenId> targets);

// Log-softmax over rows, composed from the softmax and log operators.
diff::Tensor LogSoftmaxRows(const diff::Tensor &logits);

// Inference-side scorer over a shared, read-only model.
class Scorer {
 public:
  Scorer(ScorerKind kind, std::shared_ptr<const model::Model> model,
         ScoringOptions options = {});

  ScorerKind kind() const { return kind_; }
  const model::Model &model() const { return *model_; }
  const ScoringOptions &options() const { return options_; }

  double Score(const model::TokenSeq &content) const;
  double ScoreText(const std::string &text) const;
  // All hypotheses of one n-best, encoded together where possible.
  std::vector<double> ScoreTexts(const std::vector<std::string> &texts) const;
  std::vector<double> ScoreTokens(std::span<const model::TokenSeq> contents) const;

  std::uint64_t forward_count() const { return forward_count_.load(); }
  void ResetForwardCount() { forward_count_ = 0; }

 private:
  ScorerKind kind_;
  std::shared_ptr<const model::Model> model_;
  ScoringOptions options_;
  mutable ForwardCounter forward_count_{0};
};

}  // namespace scoring
}  // namespace rescore

#endif  // RESCORE_SCORING_SCORER_H_
