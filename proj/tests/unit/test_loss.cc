// tests/unit/test_loss.cc

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

#include <cmath>
#include <random>

#include "diffcore/grad_check.h"
#include "diffcore/ops.h"
#include "diffcore/tape.h"
#include "doctest.h"
#include "helpers.h"
#include "loss/loss.h"
#include "metrics/wer.h"
#include "scoring/scorer.h"

using namespace rescore;
using namespace rescore::loss;
using diff::Tensor;
using model::Pooling;
using model::TokenSeq;
using model::Variant;
using testing::TinyModel;

namespace {

NBestBatchItem Item(std::vector<double> edits, std::vector<double> am = {}) {
  NBestBatchItem it;
  it.utt_id = "u";
  it.edits = std::move(edits);
  it.am_scores = am.empty() ? std::vector<double>(it.edits.size(), 0.0) : std::move(am);
  it.hyp_words.assign(it.edits.size(), {"w0"});
  it.ref_words = {"w0"};
  return it;
}

std::vector<Tensor> Scores(const std::vector<double> &v, bool grad = false) {
  std::vector<Tensor> out;
  for (double x : v) out.push_back(Tensor::Scalar(x, grad));
  return out;
}

double MwerValue(const NBestBatchItem &item, const std::vector<double> &lm, double lambda, bool sub) {
  auto s = Scores(lm);
  return MwerLoss(item, s, lambda, sub)->item();
}

}  // namespace

TEST_CASE("loss config") {
  LossConfig c;
  c.kind = LossKind::kMwerPlusCe;
  CHECK_ERROR_KIND(c.Validate(), ErrorKind::kConfig);
  c.alpha = 0.01;
  c.Validate();
  LossConfig back = LossConfigFromJson(ToJson(c));
  CHECK(back.kind == LossKind::kMwerPlusCe);
  CHECK(back.alpha == 0.01);
}

TEST_CASE("uniform model has CE log V") {
  model::Model m = TinyModel(Variant::kCausal);
  for (double &v : m.params.at("tok_emb").mutable_values()) v = 0.0;
  std::vector<TokenSeq> batch = {{6, 7}, {8, 9, 10}};
  CHECK(std::abs(CeLoss(m.config, m.params, batch).item() - std::log(m.config.vocab_size)) < 1e-12);

  model::Model b = TinyModel(Variant::kBidirectional);
  for (double &v : b.params.at("lm_out.weight").mutable_values()) v = 0.0;
  std::mt19937_64 rng(1);
  auto masks = SampleMasks(batch, 0.5, rng);
  CHECK(std::abs(CeLoss(b.config, b.params, batch, &masks).item() - std::log(b.config.vocab_size)) < 1e-12);
  CHECK_ERROR_KIND(CeLoss(b.config, b.params, batch), ErrorKind::kContract);
  CHECK_ERROR_KIND(CeLoss(m.config, m.params, std::vector<TokenSeq>{}), ErrorKind::kEmptyInput);
}

TEST_CASE("mask sampling") {
  std::vector<TokenSeq> batch = {{6, 7, 8, 9}, {6}};
  std::mt19937_64 rng(2);
  auto all = SampleMasks(batch, 1.0, rng);
  CHECK(all[0] == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(all[1] == std::vector<std::size_t>{1});
  auto few = SampleMasks(batch, 1e-9, rng);
  CHECK(few[0].size() == 1);
  CHECK(few[1].size() == 1);
}

TEST_CASE("n-best posterior") {
  Tensor eq = NBestPosterior(Tensor::Vector({2, 2, 2, 2}));
  for (double v : eq.values()) CHECK(v == 0.25);
  Tensor gap = NBestPosterior(Tensor::Vector({5.0, -995.0}));
  CHECK(std::abs(gap.at(0) - 1.0) < 1e-12);
  CHECK(gap.at(1) < 1e-12);
  Tensor p = NBestPosterior(Tensor::Vector({1.0, 2.0, 0.5}));
  long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(0.5L);
  CHECK(std::abs(p.at(0) - static_cast<double>(std::exp(1.0L) / z)) < 1e-15);
  CHECK(std::abs(p.at(1) - static_cast<double>(std::exp(2.0L) / z)) < 1e-15);
}

TEST_CASE("mwer loss examples") {
  SUBCASE("all correct") {
    auto item = Item({0, 0, 0});
    auto s = Scores({0.3, -1.0, 2.0}, true);
    diff::Tape tape;
    std::optional<Tensor> loss;
    {
      diff::Tape::Scope scope(tape);
      loss = MwerLoss(item, s, 0.5, false);
    }
    tape.Backward(*loss);
    CHECK(loss->item() == 0.0);
    for (auto &t : s) CHECK((!t.has_grad() || t.grad()[0] == 0.0));
  }
  SUBCASE("one-hot posterior") {
    CHECK(std::abs(MwerValue(Item({3, 1, 2}), {0, 1000, 0}, 0, false) - 1.0) < 1e-12);
    CHECK(std::abs(MwerValue(Item({3, 1, 2}), {0, 1000, 0}, 0, true) - (1.0 - 2.0)) < 1e-12);
  }
  SUBCASE("uniform posterior") {
    CHECK(std::abs(MwerValue(Item({0, 1, 2}), {0, 0, 0}, 0, false) - 1.0) < 1e-15);
    CHECK(std::abs(MwerValue(Item({0, 1, 2}), {0, 0, 0}, 0, true)) < 1e-15);
  }
  SUBCASE("fewer than two hypotheses") {
    auto s = Scores({1.0});
    CHECK_FALSE(MwerLoss(Item({1}), s, 0.0, false).has_value());
  }
}

TEST_CASE("mwer gradient against finite differences") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 2);
  std::uniform_int_distribution<int> e(0, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t N = 2 + trial % 5;
    std::vector<double> edits, am, lm;
    for (std::size_t i = 0; i < N; ++i) {
      edits.push_back(e(rng));
      am.push_back(n(rng));
      lm.push_back(n(rng));
    }
    auto item = Item(edits, am);
    auto s = Scores(lm, true);
    auto r = diff::GradCheck([&] { return *MwerLoss(item, s, 0.7, trial % 2 == 0); }, s, 1e-4, 1e-4);
    CHECK(r.pass);
  }
}

TEST_CASE("combined loss") {
  Tensor m = Tensor::Scalar(0.5), c = Tensor::Scalar(6.0);
  CHECK(CombinedLoss(m, c, 0.0).item() == 0.5);
  CHECK(std::abs(CombinedLoss(m, c, 0.01).item() - 0.56) < 1e-15);
  CHECK(CombinedLoss(m, c, 1.0).item() == 6.5);
}

TEST_CASE("mwer properties on random items") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 3);
  std::uniform_int_distribution<int> e(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t N = 2 + trial % 9;
    std::vector<double> edits, am, lm;
    for (std::size_t i = 0; i < N; ++i) {
      edits.push_back(e(rng));
      am.push_back(n(rng));
      lm.push_back(n(rng));
    }
    const bool sub = trial % 2;
    auto item = Item(edits, am);
    const double base = MwerValue(item, lm, 0.4, sub);
    std::vector<double> shifted = lm;
    const double c = n(rng) * 100;
    for (double &x : shifted) x += c;
    CHECK(std::abs(MwerValue(item, shifted, 0.4, sub) - base) <= 1e-9);
    double mean = 0;
    for (double x : edits) mean += x;
    mean /= N;
    double lo = 1e300, hi = -1e300;
    for (double x : edits) {
      lo = std::min(lo, sub ? x - mean : x);
      hi = std::max(hi, sub ? x - mean : x);
    }
    CHECK(base >= lo - 1e-12);
    CHECK(base <= hi + 1e-12);
  }
}

TEST_CASE("a small gradient step lowers the item loss") {
  auto item = Item({0, 2, 1, 3}, {-1, -0.5, -2, -0.1});
  std::vector<double> lm = {-3, -1, -2, -0.5};
  auto s = Scores(lm, true);
  diff::Tape tape;
  std::optional<Tensor> loss;
  {
    diff::Tape::Scope scope(tape);
    loss = MwerLoss(item, s, 1.0, false);
  }
  tape.Backward(*loss);
  bool decreased = false;
  for (double step : {1e-2, 1e-3, 1e-4}) {
    std::vector<double> next = lm;
    for (std::size_t i = 0; i < lm.size(); ++i) next[i] -= step * s[i].grad()[0];
    decreased = decreased || MwerValue(item, next, 1.0, false) < loss->item();
  }
  CHECK(decreased);
}

TEST_CASE("scorer-specific mwer") {
  scoring::NBestEntry entry;
  entry.utt_id = "train-00000";
  entry.ref = "w0 w1 w2";
  entry.hyps = {{"w0 w1 w2", -1.0}, {"w0 w2", -1.5}, {"w3 w1 w2", -2.0}};
  auto item = MakeBatchItem(entry);
  CHECK(item.edits == std::vector<double>{0, 1, 1});

  SUBCASE("zero cls head gives the mean edit distance") {
    model::Model m = TinyModel(Variant::kBidirectional, Pooling::kClsToken);
    for (double &v : m.params.at("head.wf").mutable_values()) v = 0.0;
    LossConfig cfg;
    auto l = MwerLossForScorer(scoring::ScorerKind::kPooledCls, m, item, cfg);
    CHECK(std::abs(l->item() - 2.0 / 3.0) < 1e-15);
  }
  SUBCASE("causal loss decomposes into scores and mwer") {
    model::Model m = TinyModel(Variant::kCausal);
    LossConfig cfg;
    cfg.lambda_train = 0.5;
    auto l = MwerLossForScorer(scoring::ScorerKind::kCausalLl, m, item, cfg);
    std::vector<double> lm;
    for (const auto &h : entry.hyps)
      lm.push_back(scoring::CausalLogLikelihood(m.config, m.params, m.vocab.EncodeText(h.text)).item());
    CHECK(std::abs(l->item() - MwerValue(item, lm, 0.5, false)) < 1e-12);
  }
  SUBCASE("PLL mwer gradient") {
    model::Model m = TinyModel(Variant::kBidirectional, Pooling::kNone, 6, 4, 1, 2);
    scoring::NBestEntry small;
    small.ref = "w0 w1 w2";
    small.hyps = {{"w0 w1 w2", -1.0}, {"w0 w3 w2", -1.2}};
    auto it = MakeBatchItem(small);
    LossConfig cfg;
    cfg.lambda_train = 0.3;
    std::vector<Tensor> leaves;
    for (const auto &[name, t] : m.params.tensors()) leaves.push_back(t);
    auto r = diff::GradCheck(
        [&] { return *MwerLossForScorer(scoring::ScorerKind::kBidirectionalPll, m, it, cfg); },
        leaves, 1e-4, 1e-3, 6);
    CHECK(r.pass);
  }
}

TEST_CASE("item loss kinds") {
  scoring::NBestEntry entry;
  entry.ref = "w0 w1";
  entry.hyps = {{"w0 w1", -1.0}, {"w0", -1.5}};
  auto item = MakeBatchItem(entry);
  model::Model m = TinyModel(Variant::kCausal);
  std::mt19937_64 rng(1);
  LossConfig mwer, combined;
  combined.kind = LossKind::kMwerPlusCe;
  combined.alpha = 0.01;
  const double a = ItemLoss(scoring::ScorerKind::kCausalLl, m, item, mwer, rng)->item();
  const double b = ItemLoss(scoring::ScorerKind::kCausalLl, m, item, combined, rng)->item();
  std::vector<TokenSeq> ref = {m.vocab.EncodeText(entry.ref)};
  const double ce = CeLoss(m.config, m.params, ref).item();
  CHECK(std::abs(b - (a + 0.01 * ce)) < 1e-12);
}

TEST_CASE("distillation loss") {
  auto s = Scores({0.0, 0.0}, true);
  std::vector<double> t = {1.0, -1.0};
  CHECK(std::abs(DistillLoss(s, t)->item() - 1.0) < 1e-15);
  std::vector<double> shifted = {101.0, 99.0};
  auto s2 = Scores({5.0, 3.0});
  CHECK(std::abs(DistillLoss(s2, shifted)->item()) < 1e-15);
  auto one = Scores({1.0});
  std::vector<double> t1 = {2.0};
  CHECK_FALSE(DistillLoss(one, t1).has_value());
  std::vector<double> t3 = {1.0, 2.0, 3.0};
  CHECK_ERROR_KIND(DistillLoss(s, t3), ErrorKind::kContract);
  auto g = Scores({0.3, -1.2, 2.0, 0.1}, true);
  std::vector<double> tg = {-3.0, -1.0, -2.5, 0.5};
  CHECK(diff::GradCheck([&] { return *DistillLoss(g, tg); }, g, 1e-4, 1e-4).pass);
}
