// model/transformer.cc

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

#include "model/transformer.h"

#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "common/error.h"
#include "diffcore/ops.h"

namespace rescore {
namespace model {

using diff::Tensor;

namespace {

// Large negative additive mask; exp() of it underflows to exactly 0.
constexpr double kMaskedScore = -1e9;

const Tensor &CausalMask(std::size_t t) {
  thread_local std::map<std::size_t, Tensor> cache;
  auto it = cache.find(t);
  if (it != cache.end()) return it->second;
  std::vector<double> v(t * t, 0.0);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j) v[i * t + j] = kMaskedScore;
  return cache.emplace(t, Tensor::Matrix(t, t, std::move(v))).first->second;
}

std::string L(std::size_t l, const std::string &s) {
  return "layer." + std::to_string(l) + "." + s;
}

Tensor Attend(const Tensor &q, const Tensor &k, const Tensor &v, double scale,
              bool causal) {
  Tensor scores = diff::Scale(diff::MatMul(q, diff::Transpose(k)), scale);
  if (causal && q.rows() > 1) scores = diff::Add(scores, CausalMask(q.rows()));
  return diff::MatMul(diff::Softmax(scores, -1), v);
}

Tensor MultiHeadAttention(const ModelConfig &c, const ModelParams &p,
                          std::size_t layer, const Tensor &x,
                          const std::vector<std::vector<std::size_t>> &seq_rows) {
  const bool causal = c.variant == Variant::kCausal;
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.d_k()));
  Tensor out;
  for (std::size_t h = 0; h < c.n_heads; ++h) {
    const std::string prefix = "attn.h" + std::to_string(h) + ".";
    Tensor q = diff::Add(diff::MatMul(x, p.at(L(layer, prefix + "wq"))),
                         p.at(L(layer, prefix + "bq")));
    Tensor k = diff::Add(diff::MatMul(x, p.at(L(layer, prefix + "wk"))),
                         p.at(L(layer, prefix + "bk")));
    Tensor v = diff::Add(diff::MatMul(x, p.at(L(layer, prefix + "wv"))),
                         p.at(L(layer, prefix + "bv")));
    Tensor context;
    if (seq_rows.size() == 1) {
      context = Attend(q, k, v, scale, causal);
    } else {
      std::vector<Tensor> parts;
      parts.reserve(seq_rows.size());
      for (const auto &rows : seq_rows)
        parts.push_back(Attend(GatherRows(q, rows), GatherRows(k, rows),
                               GatherRows(v, rows), scale, causal));
      context = diff::ConcatRows(parts);
    }
    Tensor projected = diff::MatMul(context, p.at(L(layer, prefix + "wo")));
    out = out.defined() ? diff::Add(out, projected) : projected;
  }
  return diff::Add(out, p.at(L(layer, "attn.bo")));
}

void CheckFraming(const ModelConfig &c, const TokenSeq &tokens, TokenId first,
                  std::size_t framing) {
  if (tokens.empty())
    Fail(ErrorKind::kEmptyInput, "forward: empty token sequence");
  if (tokens[0] != first)
    Fail(ErrorKind::kContract,
         std::string("forward: sequence must start with ") +
             (first == special::kBos ? "BOS" : "CLS"));
  if (tokens.size() > c.max_len + framing)
    Fail(ErrorKind::kLength,
         "forward: sequence of " + std::to_string(tokens.size()) +
             " tokens exceeds max_len " + std::to_string(c.max_len) + " + " +
             std::to_string(framing) + " framing tokens");
}

}  // namespace

Model MakeModel(ModelConfig config, Vocabulary vocab) {
  config.vocab_size = vocab.size();
  Model m{config, std::move(vocab), ModelParams::Init(config)};
  return m;
}

Tensor GatherRows(const Tensor &t, std::span<const std::size_t> rows) {
  return diff::EmbeddingLookup(t, rows);
}

EncodedBatch Encode(const ModelConfig &c, const ModelParams &p,
                    std::span<const TokenSeq> sequences) {
  if (sequences.empty())
    Fail(ErrorKind::kEmptyInput, "encode: no sequences");
  EncodedBatch batch;
  std::vector<std::size_t> ids, positions;
  std::vector<std::vector<std::size_t>> seq_rows;
  std::size_t offset = 0;
  for (const TokenSeq &seq : sequences) {
    if (seq.empty()) Fail(ErrorKind::kEmptyInput, "encode: empty sequence");
    if (seq.size() > c.position_rows())
      Fail(ErrorKind::kLength, "encode: sequence of " +
                                   std::to_string(seq.size()) +
                                   " tokens exceeds " +
                                   std::to_string(c.position_rows()) +
                                   " positions");
    std::vector<std::size_t> rows(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] >= c.vocab_size)
        Fail(ErrorKind::kVocab, "encode: token id " + std::to_string(seq[t]) +
                                    " outside vocabulary of size " +
                                    std::to_string(c.vocab_size));
      ids.push_back(seq[t]);
      positions.push_back(t);
      rows[t] = offset + t;
    }
    batch.offsets.push_back(offset);
    batch.lengths.push_back(seq.size());
    seq_rows.push_back(std::move(rows));
    offset += seq.size();
  }

  Tensor x = diff::Add(diff::EmbeddingLookup(p.at("tok_emb"), ids),
                       diff::EmbeddingLookup(p.at("pos_emb"), positions));
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    Tensor h = diff::LayerNorm(x, p.at(L(l, "ln1.gain")),
                               p.at(L(l, "ln1.bias")));
    x = diff::Add(x, MultiHeadAttention(c, p, l, h, seq_rows));
    Tensor h2 = diff::LayerNorm(x, p.at(L(l, "ln2.gain")),
                                p.at(L(l, "ln2.bias")));
    Tensor ff = diff::Gelu(
        diff::Add(diff::MatMul(h2, p.at(L(l, "ff.w1"))), p.at(L(l, "ff.b1"))));
    ff = diff::Add(diff::MatMul(ff, p.at(L(l, "ff.w2"))), p.at(L(l, "ff.b2")));
    x = diff::Add(x, ff);
  }
  batch.hidden =
      diff::LayerNorm(x, p.at("final_ln.gain"), p.at("final_ln.bias"));
  return batch;
}

Tensor LmLogits(const ModelConfig &c, const ModelParams &p,
                const Tensor &hidden_rows) {
  Tensor weight = c.tied_output() ? diff::Transpose(p.at("tok_emb"))
                                  : p.at("lm_out.weight");
  return diff::Add(diff::MatMul(hidden_rows, weight), p.at("lm_out.bias"));
}

ForwardOutput ForwardCausal(const ModelConfig &c, const ModelParams &p,
                            const TokenSeq &tokens) {
  if (c.variant != Variant::kCausal)
    Fail(ErrorKind::kConfig, "forward_causal on a bidirectional model");
  CheckFraming(c, tokens, special::kBos, 2);
  EncodedBatch enc = Encode(c, p, std::span<const TokenSeq>(&tokens, 1));
  return {LmLogits(c, p, enc.hidden), enc.hidden};
}

ForwardOutput ForwardBidirectional(const ModelConfig &c, const ModelParams &p,
                                   const TokenSeq &tokens,
                                   std::span<const std::size_t> mask_positions) {
  if (c.variant != Variant::kBidirectional)
    Fail(ErrorKind::kConfig, "forward_bidirectional on a causal model");
  CheckFraming(c, tokens, special::kCls, 1);
  TokenSeq masked = tokens;
  for (std::size_t pos : mask_positions) {
    if (pos == 0 || pos >= tokens.size())
      Fail(ErrorKind::kContract,
           "forward_bidirectional: mask position " + std::to_string(pos) +
               " outside content positions [1, " +
               std::to_string(tokens.size()) + ")");
    masked[pos] = special::kMask;
  }
  EncodedBatch enc = Encode(c, p, std::span<const TokenSeq>(&masked, 1));
  return {LmLogits(c, p, enc.hidden), enc.hidden};
}

Tensor AttentionPoolingWeights(const ModelConfig &c, const ModelParams &p,
                               const Tensor &hidden) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.d_k()));
  Tensor query = diff::MatMul(p.at("head.query"), p.at("head.wq"));
  Tensor keys = diff::MatMul(hidden, p.at("head.wk"));
  return diff::Softmax(
      diff::Scale(diff::MatMul(query, diff::Transpose(keys)), scale), -1);
}

Tensor PoolAndScore(const ModelConfig &c, const ModelParams &p,
                    const Tensor &hidden, Pooling pooling) {
  if (pooling == Pooling::kNone)
    Fail(ErrorKind::kConfig, "pool_and_score: pooling is 'none'");
  if (!PoolingCompatible(c.variant, pooling))
    Fail(ErrorKind::kConfig, std::string("pool_and_score: pooling '") +
                                 PoolingName(pooling) +
                                 "' is not defined for the " +
                                 VariantName(c.variant) + " variant");
  if (!p.contains("head.wf") ||
      (pooling == Pooling::kAttention && !p.contains("head.query")))
    Fail(ErrorKind::kConfig, std::string("pool_and_score: model has no '") +
                                 PoolingName(pooling) + "' score head");
  if (hidden.rank() != 2 || hidden.rows() == 0)
    Fail(ErrorKind::kDimension, "pool_and_score: hidden states must be [L x d]");

  Tensor pooled;
  if (pooling == Pooling::kLastToken) {
    const std::size_t last = hidden.rows() - 1;
    pooled = GatherRows(hidden, std::span<const std::size_t>(&last, 1));
  } else if (pooling == Pooling::kClsToken) {
    const std::size_t first = 0;
    pooled = GatherRows(hidden, std::span<const std::size_t>(&first, 1));
  } else {
    Tensor weights = AttentionPoolingWeights(c, p, hidden);
    Tensor values = diff::MatMul(hidden, p.at("head.wv"));
    pooled = diff::MatMul(weights, values);
  }
  Tensor score =
      diff::Add(diff::MatMul(pooled, p.at("head.wf")), p.at("head.bf"));
  return diff::Sum(score);
}

}  // namespace model
}  // namespace rescore
