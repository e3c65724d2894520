// loss/loss.cc

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

#include "loss/loss.h"

#include <algorithm>
#include <numeric>

#include "common/error.h"
#include "diffcore/ops.h"
#include "metrics/text.h"

namespace rescore {
namespace loss {

using diff::Tensor;
using model::TokenSeq;
namespace special = model::special;

const char *LossKindName(LossKind k) {
  switch (k) {
    case LossKind::kCe: return "ce";
    case LossKind::kMwer: return "mwer";
    case LossKind::kMwerPlusCe: return "mwer_plus_ce";
  }
  return "mwer";
}

LossKind ParseLossKind(const std::string &s) {
  if (s == "ce") return LossKind::kCe;
  if (s == "mwer") return LossKind::kMwer;
  if (s == "mwer_plus_ce") return LossKind::kMwerPlusCe;
  Fail(ErrorKind::kConfig, "unknown loss kind '" + s + "'");
}

void LossConfig::Validate() const {
  if (!(alpha >= 0.0)) Fail(ErrorKind::kConfig, "alpha must be >= 0");
  if (kind == LossKind::kMwerPlusCe && !(alpha > 0.0))
    Fail(ErrorKind::kConfig, "mwer_plus_ce needs alpha > 0");
  if (!(lambda_train >= 0.0)) Fail(ErrorKind::kConfig, "lambda_train must be >= 0");
  if (!(mask_rate > 0.0 && mask_rate <= 1.0))
    Fail(ErrorKind::kConfig, "mask_rate must be in (0, 1]");
}

Json ToJson(const LossConfig &c) {
  Json j;
  j["kind"] = LossKindName(c.kind);
  j["alpha"] = c.alpha;
  j["lambda_train"] = c.lambda_train;
  j["subtract_mean_edit"] = c.subtract_mean_edit;
  j["mask_rate"] = c.mask_rate;
  return j;
}

LossConfig LossConfigFromJson(const Json &j, LossConfig c) {
  if (j.contains("kind")) c.kind = ParseLossKind(j["kind"].get<std::string>());
  c.alpha = j.value("alpha", c.alpha);
  c.lambda_train = j.value("lambda_train", c.lambda_train);
  c.subtract_mean_edit = j.value("subtract_mean_edit", c.subtract_mean_edit);
  c.mask_rate = j.value("mask_rate", c.mask_rate);
  c.Validate();
  return c;
}

NBestBatchItem MakeBatchItem(const scoring::NBestEntry &entry) {
  NBestBatchItem item;
  item.utt_id = entry.utt_id;
  item.ref_words = metrics::NormalizedWords(entry.ref);
  for (const auto &h : entry.hyps) {
    item.hyp_words.push_back(metrics::NormalizedWords(h.text));
    item.am_scores.push_back(h.am_score);
    item.edits.push_back(static_cast<double>(
        metrics::EditDistance(item.hyp_words.back(), item.ref_words).distance));
  }
  return item;
}

std::vector<std::vector<std::size_t>> SampleMasks(
    std::span<const TokenSeq> contents, double rate, Rng &rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<std::size_t>> masks(contents.size());
  for (std::size_t s = 0; s < contents.size(); ++s) {
    const std::size_t l = contents[s].size();
    if (l == 0) continue;
    for (std::size_t i = 1; i <= l; ++i)
      if (unit(rng) < rate) masks[s].push_back(i);
    if (masks[s].empty())
      masks[s].push_back(1 + std::uniform_int_distribution<std::size_t>(0, l - 1)(rng));
  }
  return masks;
}

Tensor CeLoss(const model::ModelConfig &c, const model::ModelParams &p,
              std::span<const TokenSeq> contents,
              const std::vector<std::vector<std::size_t>> *masks) {
  if (contents.empty()) Fail(ErrorKind::kEmptyInput, "ce_loss: empty batch");
  const bool causal = c.variant == model::Variant::kCausal;
  if (!causal && (!masks || masks->size() != contents.size()))
    Fail(ErrorKind::kContract, "ce_loss: masked-LM CE needs one mask list per sentence");

  std::vector<TokenSeq> inputs;
  std::vector<std::size_t> rows;
  std::vector<model::TokenId> targets;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < contents.size(); ++s) {
    const TokenSeq &content = contents[s];
    if (content.size() > c.max_len)
      Fail(ErrorKind::kLength, "ce_loss: sentence of " +
                                   std::to_string(content.size()) +
                                   " tokens exceeds max_len " +
                                   std::to_string(c.max_len));
    TokenSeq framed;
    framed.push_back(causal ? special::kBos : special::kCls);
    framed.insert(framed.end(), content.begin(), content.end());
    if (causal) {
      framed.push_back(special::kEos);
      for (std::size_t t = 0; t + 1 < framed.size(); ++t) {
        rows.push_back(offset + t);
        targets.push_back(framed[t + 1]);
      }
    } else {
      TokenSeq masked = framed;
      for (std::size_t pos : (*masks)[s]) {
        if (pos == 0 || pos >= framed.size())
          Fail(ErrorKind::kContract, "ce_loss: mask position out of range");
        masked[pos] = special::kMask;
        rows.push_back(offset + pos);
        targets.push_back(framed[pos]);
      }
      framed = std::move(masked);
    }
    offset += framed.size();
    inputs.push_back(std::move(framed));
  }
  if (rows.empty()) Fail(ErrorKind::kEmptyInput, "ce_loss: nothing to predict");

  model::EncodedBatch enc = model::Encode(c, p, inputs);
  Tensor logp = scoring::LogSoftmaxRows(
      model::LmLogits(c, p, model::GatherRows(enc.hidden, rows)));
  return diff::Scale(scoring::PickSum(logp, targets),
                     -1.0 / static_cast<double>(rows.size()));
}

Tensor NBestPosterior(const Tensor &interp_scores) {
  return diff::Softmax(interp_scores, -1);
}

std::optional<Tensor> MwerLoss(const NBestBatchItem &item,
                               std::span<const Tensor> lm_scores, double lambda,
                               bool subtract_mean_edit) {
  const std::size_t n = lm_scores.size();
  if (n != item.am_scores.size() || n != item.edits.size())
    Fail(ErrorKind::kContract, "mwer_loss: " + std::to_string(n) +
                                   " scores for " +
                                   std::to_string(item.am_scores.size()) +
                                   " hypotheses");
  if (n < 2) return std::nullopt;
  if (!(lambda >= 0.0)) Fail(ErrorKind::kContract, "mwer_loss: lambda must be >= 0");

  std::vector<double> am(n), edits(item.edits);
  for (std::size_t i = 0; i < n; ++i) am[i] = lambda * item.am_scores[i];
  if (subtract_mean_edit) {
    const double mean = std::accumulate(edits.begin(), edits.end(), 0.0) / n;
    for (double &e : edits) e -= mean;
  }
  Tensor stacked = diff::Transpose(diff::ConcatRows(lm_scores));  // [1 x N]
  Tensor interp = diff::Add(stacked, Tensor::Matrix(1, n, std::move(am)));
  Tensor posterior = NBestPosterior(interp);
  return diff::Sum(diff::Mul(posterior, Tensor::Matrix(1, n, std::move(edits))));
}

std::optional<Tensor> DistillLoss(std::span<const Tensor> student,
                                  std::span<const double> teacher) {
  const std::size_t n = student.size();
  if (n != teacher.size())
    Fail(ErrorKind::kContract, "distill_loss: " + std::to_string(n) +
                                   " scores for " + std::to_string(teacher.size()) +
                                   " targets");
  if (n < 2) return std::nullopt;
  std::vector<double> center(n * n, -1.0 / n), target(teacher.begin(), teacher.end());
  for (std::size_t i = 0; i < n; ++i) center[i * n + i] += 1.0;
  const double mean = std::accumulate(target.begin(), target.end(), 0.0) / n;
  for (double &t : target) t = mean - t;
  Tensor stacked = diff::Transpose(diff::ConcatRows(student));
  Tensor gap = diff::Add(diff::MatMul(stacked, Tensor::Matrix(n, n, std::move(center))),
                         Tensor::Matrix(1, n, std::move(target)));
  return diff::Mean(diff::Mul(gap, gap));
}

Tensor CombinedLoss(const Tensor &mwer, const Tensor &ce, double alpha) {
  if (!(alpha >= 0.0)) Fail(ErrorKind::kContract, "combined_loss: alpha must be >= 0");
  if (alpha == 0.0) return mwer;
  return diff::Add(mwer, diff::Scale(ce, alpha));
}

std::optional<Tensor> MwerLossForScorer(scoring::ScorerKind kind,
                                        const model::Model &m,
                                        const NBestBatchItem &item,
                                        const LossConfig &cfg,
                                        const scoring::ScoringOptions &options,
                                        scoring::ForwardCounter *counter) {
  if (item.hyp_words.size() < 2) return std::nullopt;
  std::vector<TokenSeq> contents;
  contents.reserve(item.hyp_words.size());
  for (const auto &w : item.hyp_words) contents.push_back(m.vocab.Encode(w));
  std::vector<Tensor> scores = scoring::ScoreTensors(kind, m.config, m.params,
                                                     contents, options, counter);
  return MwerLoss(item, scores, cfg.lambda_train, cfg.subtract_mean_edit);
}

std::optional<Tensor> ItemLoss(scoring::ScorerKind kind, const model::Model &m,
                               const NBestBatchItem &item, const LossConfig &cfg,
                               Rng &rng, const scoring::ScoringOptions &options) {
  auto ce = [&]() {
    TokenSeq ref = m.vocab.Encode(item.ref_words);
    std::vector<std::vector<std::size_t>> masks;
    if (m.config.variant == model::Variant::kBidirectional)
      masks = SampleMasks(std::span<const TokenSeq>(&ref, 1), cfg.mask_rate, rng);
    return CeLoss(m.config, m.params, std::span<const TokenSeq>(&ref, 1), &masks);
  };
  switch (cfg.kind) {
    case LossKind::kCe:
      return ce();
    case LossKind::kMwer:
      return MwerLossForScorer(kind, m, item, cfg, options);
    case LossKind::kMwerPlusCe: {
      auto mwer = MwerLossForScorer(kind, m, item, cfg, options);
      if (!mwer) return std::nullopt;
      return CombinedLoss(*mwer, ce(), cfg.alpha);
    }
  }
  return std::nullopt;
}

}  // namespace loss
}  // namespace rescore
