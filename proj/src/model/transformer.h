// model/transformer.h

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

#ifndef RESCORE_MODEL_TRANSFORMER_H_
#define RESCORE_MODEL_TRANSFORMER_H_

#include <span>
#include <vector>

#include "diffcore/tensor.h"
#include "model/config.h"
#include "model/params.h"
#include "model/vocabulary.h"

namespace rescore {
namespace model {

struct Model {
  ModelConfig config;
  Vocabulary vocab;
  ModelParams params;
};

// Fresh model over `vocab` (config.vocab_size is overwritten).
Model MakeModel(ModelConfig config, Vocabulary vocab);

// Hidden states of several sequences stacked row-wise. Sequence s occupies
// rows [offsets[s], offsets[s] + lengths[s]).
struct EncodedBatch {
  diff::Tensor hidden;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> lengths;
};

// Pre-layer-norm transformer over already framed sequences. Attention is
// restricted to each sequence (and to the past for causal models); all
// row-wise work is shared, so a sequence's hidden states are bit-identical
// whether it is encoded alone or inside a batch.
EncodedBatch Encode(const ModelConfig &config, const ModelParams &params,
                    std::span<const TokenSeq> sequences);

// Vocabulary logits [rows x V] for the given hidden rows.
diff::Tensor LmLogits(const ModelConfig &config, const ModelParams &params,
                      const diff::Tensor &hidden_rows);

// Rows of `t` selected by index.
diff::Tensor GatherRows(const diff::Tensor &t,
                        std::span<const std::size_t> rows);

struct ForwardOutput {
  diff::Tensor logits;  // [L x V]
  diff::Tensor hidden;  // [L x d]
};

// tokens must start with BOS; content length <= max_len.
ForwardOutput ForwardCausal(const ModelConfig &config,
                            const ModelParams &params, const TokenSeq &tokens);

// tokens must start with CLS. Positions in mask_positions are replaced by
// MASK before encoding.
ForwardOutput ForwardBidirectional(const ModelConfig &config,
                                   const ModelParams &params,
                                   const TokenSeq &tokens,
                                   std::span<const std::size_t> mask_positions);

// Scalar score (rank 0) from one sequence's hidden states [L x d]:
//   last_token  W_F(H[L-1])
//   cls_token   W_F(H[0])
//   attention   W_F(softmax(q W_Q (H W_K)^T / sqrt(d_k)) H W_V)
diff::Tensor PoolAndScore(const ModelConfig &config, const ModelParams &params,
                          const diff::Tensor &hidden, Pooling pooling);

// The attention-pooling distribution over positions, [1 x L].
diff::Tensor AttentionPoolingWeights(const ModelConfig &config,
                                     const ModelParams &params,
                                     const diff::Tensor &hidden);

}  // namespace model
}  // namespace rescore

#endif  // RESCORE_MODEL_TRANSFORMER_H_
