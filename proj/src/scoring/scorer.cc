// scoring/scorer.cc

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

#include "scoring/scorer.h"

#include "common/error.h"
#include "diffcore/ops.h"
#include "metrics/text.h"

namespace rescore {
namespace scoring {

using diff::Tensor;
using model::ModelConfig;
using model::ModelParams;
using model::TokenSeq;
namespace special = model::special;

namespace {

void CheckContentLength(const ModelConfig &c, const TokenSeq &content) {
  if (content.size() > c.max_len)
    Fail(ErrorKind::kLength, "hypothesis of " + std::to_string(content.size()) +
                                 " tokens exceeds max_len " +
                                 std::to_string(c.max_len));
}

TokenSeq Frame(model::Variant v, const TokenSeq &content) {
  TokenSeq framed;
  framed.reserve(content.size() + 2);
  framed.push_back(v == model::Variant::kCausal ? special::kBos : special::kCls);
  framed.insert(framed.end(), content.begin(), content.end());
  if (v == model::Variant::kCausal) framed.push_back(special::kEos);
  return framed;
}

std::vector<std::size_t> Range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> r;
  r.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) r.push_back(i);
  return r;
}

void Count(ForwardCounter *counter, std::uint64_t n) {
  if (counter) counter->fetch_add(n, std::memory_order_relaxed);
}

Tensor Normalize(Tensor score, std::size_t n, const ScoringOptions &o) {
  if (!o.length_normalize || n == 0) return score;
  return diff::Scale(score, 1.0 / static_cast<double>(n));
}

// Log-likelihood of framed[1..T) from the hidden rows of framed[0..T-1).
Tensor CausalFromHidden(const ModelConfig &c, const ModelParams &p,
                        const Tensor &hidden, std::size_t offset,
                        const TokenSeq &framed) {
  const std::size_t t = framed.size();
  Tensor rows = model::GatherRows(hidden, Range(offset, offset + t - 1));
  Tensor logp = LogSoftmaxRows(model::LmLogits(c, p, rows));
  return PickSum(logp, std::span<const model::TokenId>(framed).subspan(1));
}

void CheckVariant(const ModelConfig &c, model::Variant v, const char *what) {
  if (c.variant != v)
    Fail(ErrorKind::kConfig, std::string(what) + " needs a " +
                                 model::VariantName(v) + " model, got " +
                                 model::VariantName(c.variant));
}

}  // namespace

const char *ScorerKindName(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kCausalLl: return "causal_ll";
    case ScorerKind::kBidirectionalPll: return "bidirectional_pll";
    case ScorerKind::kPooledLast: return "pooled_last";
    case ScorerKind::kPooledCls: return "pooled_cls";
    case ScorerKind::kPooledAttention: return "pooled_attention";
  }
  return "causal_ll";
}

ScorerKind ParseScorerKind(const std::string &name) {
  for (ScorerKind k : kAllScorerKinds)
    if (name == ScorerKindName(k)) return k;
  Fail(ErrorKind::kConfig, "unknown scorer kind '" + name + "'");
}

model::Variant RequiredVariant(ScorerKind kind) {
  return kind == ScorerKind::kBidirectionalPll || kind == ScorerKind::kPooledCls
             ? model::Variant::kBidirectional
             : model::Variant::kCausal;
}

model::Pooling RequiredPooling(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kPooledLast: return model::Pooling::kLastToken;
    case ScorerKind::kPooledCls: return model::Pooling::kClsToken;
    case ScorerKind::kPooledAttention: return model::Pooling::kAttention;
    default: return model::Pooling::kNone;
  }
}

bool IsPooled(ScorerKind kind) {
  return RequiredPooling(kind) != model::Pooling::kNone;
}

void CheckCompatible(ScorerKind kind, const ModelConfig &c,
                     const ModelParams &p) {
  CheckVariant(c, RequiredVariant(kind), ScorerKindName(kind));
  if (IsPooled(kind) && (c.pooling != RequiredPooling(kind) ||
                         !p.contains("head.wf")))
    Fail(ErrorKind::kConfig, std::string(ScorerKindName(kind)) +
                                 " needs a '" +
                                 model::PoolingName(RequiredPooling(kind)) +
                                 "' score head, model has '" +
                                 model::PoolingName(c.pooling) + "'");
}

Tensor LogSoftmaxRows(const Tensor &logits) {
  return diff::Log(diff::Softmax(logits, -1));
}

Tensor PickSum(const Tensor &log_probs, std::span<const model::TokenId> targets) {
  const std::size_t r = log_probs.rows(), v = log_probs.cols();
  if (targets.size() != r)
    Fail(ErrorKind::kDimension, "pick: " + std::to_string(targets.size()) +
                                    " targets for " + std::to_string(r) +
                                    " rows");
  std::vector<double> onehot(r * v, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    if (targets[i] >= v)
      Fail(ErrorKind::kVocab, "pick: target id " + std::to_string(targets[i]) +
                                  " outside vocabulary of size " +
                                  std::to_string(v));
    onehot[i * v + targets[i]] = 1.0;
  }
  return diff::Sum(diff::Mul(log_probs, Tensor::Matrix(r, v, std::move(onehot))));
}

Tensor CausalLogLikelihood(const ModelConfig &c, const ModelParams &p,
                           const TokenSeq &content, ForwardCounter *counter) {
  CheckVariant(c, model::Variant::kCausal, "causal log-likelihood");
  CheckContentLength(c, content);
  TokenSeq framed = Frame(c.variant, content);
  model::EncodedBatch enc =
      model::Encode(c, p, std::span<const TokenSeq>(&framed, 1));
  Count(counter, 1);
  return CausalFromHidden(c, p, enc.hidden, 0, framed);
}

Tensor PseudoLogLikelihood(const ModelConfig &c, const ModelParams &p,
                           const TokenSeq &content, ForwardCounter *counter) {
  CheckVariant(c, model::Variant::kBidirectional, "pseudo-log-likelihood");
  if (content.empty())
    Fail(ErrorKind::kEmptyInput, "pseudo-log-likelihood of an empty hypothesis");
  CheckContentLength(c, content);
  const std::size_t l = content.size();
  const TokenSeq framed = Frame(c.variant, content);
  std::vector<TokenSeq> copies(l, framed);
  for (std::size_t i = 0; i < l; ++i) copies[i][i + 1] = special::kMask;
  model::EncodedBatch enc = model::Encode(c, p, copies);
  Count(counter, l);
  std::vector<std::size_t> rows(l);
  for (std::size_t i = 0; i < l; ++i) rows[i] = enc.offsets[i] + i + 1;
  Tensor logp =
      LogSoftmaxRows(model::LmLogits(c, p, model::GatherRows(enc.hidden, rows)));
  return PickSum(logp, content);
}

Tensor PseudoLogLikelihoodLoop(const ModelConfig &c, const ModelParams &p,
                               const TokenSeq &content, ForwardCounter *counter) {
  CheckVariant(c, model::Variant::kBidirectional, "pseudo-log-likelihood");
  if (content.empty())
    Fail(ErrorKind::kEmptyInput, "pseudo-log-likelihood of an empty hypothesis");
  CheckContentLength(c, content);
  const TokenSeq framed = Frame(c.variant, content);
  Tensor total;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const std::size_t pos = i + 1;
    model::ForwardOutput out = model::ForwardBidirectional(
        c, p, framed, std::span<const std::size_t>(&pos, 1));
    Count(counter, 1);
    Tensor row = model::GatherRows(out.hidden, std::span<const std::size_t>(&pos, 1));
    Tensor term = PickSum(LogSoftmaxRows(model::LmLogits(c, p, row)),
                          std::span<const model::TokenId>(&content[i], 1));
    total = total.defined() ? diff::Add(total, term) : term;
  }
  return total;
}

std::vector<Tensor> ScoreTensors(ScorerKind kind, const ModelConfig &c,
                                 const ModelParams &p,
                                 std::span<const TokenSeq> contents,
                                 const ScoringOptions &options,
                                 ForwardCounter *counter) {
  CheckCompatible(kind, c, p);
  std::vector<Tensor> scores;
  scores.reserve(contents.size());
  if (contents.empty()) return scores;

  if (kind == ScorerKind::kBidirectionalPll) {
    for (const TokenSeq &content : contents) {
      Tensor s = PseudoLogLikelihood(c, p, content, counter);
      if (options.paper_literal_pll_sign) s = diff::Scale(s, -1.0);
      scores.push_back(Normalize(s, content.size(), options));
    }
    return scores;
  }

  std::vector<TokenSeq> framed;
  framed.reserve(contents.size());
  for (const TokenSeq &content : contents) {
    CheckContentLength(c, content);
    framed.push_back(Frame(c.variant, content));
  }
  model::EncodedBatch enc = model::Encode(c, p, framed);
  Count(counter, framed.size());
  for (std::size_t s = 0; s < framed.size(); ++s) {
    if (kind == ScorerKind::kCausalLl) {
      scores.push_back(Normalize(
          CausalFromHidden(c, p, enc.hidden, enc.offsets[s], framed[s]),
          contents[s].size(), options));
    } else {
      Tensor hidden = framed.size() == 1
                          ? enc.hidden
                          : model::GatherRows(
                                enc.hidden, Range(enc.offsets[s],
                                                  enc.offsets[s] + enc.lengths[s]));
      scores.push_back(model::PoolAndScore(c, p, hidden, RequiredPooling(kind)));
    }
  }
  return scores;
}

Scorer::Scorer(ScorerKind kind, std::shared_ptr<const model::Model> model,
               ScoringOptions options)
    : kind_(kind), model_(std::move(model)), options_(options) {
  if (!model_) Fail(ErrorKind::kContract, "scorer: null model");
  CheckCompatible(kind_, model_->config, model_->params);
}

double Scorer::Score(const TokenSeq &content) const {
  return ScoreTensors(kind_, model_->config, model_->params,
                      std::span<const TokenSeq>(&content, 1), options_,
                      &forward_count_)[0]
      .item();
}

double Scorer::ScoreText(const std::string &text) const {
  return Score(model_->vocab.EncodeText(text));
}

std::vector<double> Scorer::ScoreTexts(const std::vector<std::string> &texts) const {
  std::vector<TokenSeq> contents;
  contents.reserve(texts.size());
  for (const auto &t : texts) contents.push_back(model_->vocab.EncodeText(t));
  return ScoreTokens(contents);
}

std::vector<double> Scorer::ScoreTokens(std::span<const TokenSeq> contents) const {
  std::vector<Tensor> scores = ScoreTensors(kind_, model_->config, model_->params,
                                            contents, options_, &forward_count_);
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto &s : scores) out.push_back(s.item());
  return out;
}

}  // namespace scoring
}  // namespace rescore
