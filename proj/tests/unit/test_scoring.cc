// tests/unit/test_scoring.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.h"
#include "scoring/nbest.h"
#include "scoring/rescore.h"
#include "scoring/scorer.h"

using namespace rescore;
using namespace rescore::scoring;
using model::Pooling;
using model::TokenSeq;
using model::Variant;
using testing::TinyModel;

namespace {

std::shared_ptr<const model::Model> Share(model::Model m) {
  return std::make_shared<const model::Model>(std::move(m));
}

NBestEntry Entry(std::vector<std::pair<std::string, double>> hyps, std::string ref = "w0 w1") {
  NBestEntry e;
  e.utt_id = "u";
  e.ref = std::move(ref);
  for (auto &[t, a] : hyps) e.hyps.push_back({t, a});
  return e;
}

}  // namespace

TEST_CASE("uniform causal model scores -(L+1) log V") {
  model::Model m = TinyModel(Variant::kCausal);
  for (double &v : m.params.at("tok_emb").mutable_values()) v = 0.0;
  const double V = static_cast<double>(m.config.vocab_size);
  Scorer s(ScorerKind::kCausalLl, Share(m));
  CHECK(std::abs(s.Score({6, 7, 8}) + 4.0 * std::log(V)) < 1e-9);
}

TEST_CASE("uniform masked model scores log(1/V) for one token") {
  model::Model m = TinyModel(Variant::kBidirectional);
  for (double &v : m.params.at("lm_out.weight").mutable_values()) v = 0.0;
  Scorer s(ScorerKind::kBidirectionalPll, Share(m));
  CHECK(std::abs(s.Score({7}) - std::log(1.0 / m.config.vocab_size)) < 1e-12);
}

TEST_CASE("causal score matches the chain rule on a manual forward pass") {
  model::Model m = TinyModel(Variant::kCausal, Pooling::kNone, 4, 4, 1, 1);
  testing::HandSet(m.params);
  TokenSeq framed = {model::special::kBos, 6, 8, model::special::kEos};
  auto ref = testing::ManualForward(m, framed);
  double expect = 0;
  for (std::size_t t = 0; t + 1 < framed.size(); ++t)
    expect += testing::LogSoftmaxAt(ref.logits[t], framed[t + 1]);
  CHECK(std::abs(CausalLogLikelihood(m.config, m.params, {6, 8}).item() - expect) < 1e-12);
}

TEST_CASE("a sequence never beats the most probable sequence of its length") {
  model::Model m = TinyModel(Variant::kCausal, Pooling::kNone, 4);
  Scorer s(ScorerKind::kCausalLl, Share(m));
  double best = -1e300;
  for (model::TokenId a = 0; a < m.config.vocab_size; ++a)
    for (model::TokenId b = 0; b < m.config.vocab_size; ++b) best = std::max(best, s.Score({a, b}));
  CHECK(s.Score({6, 7}) <= best);
}

TEST_CASE("batched PLL equals the one-mask loop bit for bit") {
  model::Model m = TinyModel(Variant::kBidirectional, Pooling::kNone, 9, 8, 2, 2);
  std::mt19937_64 rng(1);
  for (std::size_t L : {1, 2, 5, 17, 64}) {
    TokenSeq t(L);
    for (auto &x : t) x = model::special::kCount + rng() % 9;
    ForwardCounter batched{0}, loop{0};
    double a = PseudoLogLikelihood(m.config, m.params, t, &batched).item();
    double b = PseudoLogLikelihoodLoop(m.config, m.params, t, &loop).item();
    CHECK(a == b);
    CHECK(batched.load() == L);
    CHECK(loop.load() == L);
  }
  CHECK_ERROR_KIND(PseudoLogLikelihood(m.config, m.params, {}), ErrorKind::kEmptyInput);
}

TEST_CASE("PLL sign flag negates") {
  model::Model m = TinyModel(Variant::kBidirectional);
  auto shared = Share(m);
  ScoringOptions lit;
  lit.paper_literal_pll_sign = true;
  CHECK(Scorer(ScorerKind::kBidirectionalPll, shared).Score({6, 7}) ==
        -Scorer(ScorerKind::kBidirectionalPll, shared, lit).Score({6, 7}));
}

TEST_CASE("pooled scores") {
  model::Model m = TinyModel(Variant::kBidirectional, Pooling::kClsToken);
  SUBCASE("decomposition into encode and pool") {
    Scorer s(ScorerKind::kPooledCls, Share(m));
    auto enc = model::Encode(m.config, m.params, std::vector<TokenSeq>{{model::special::kCls, 6, 9}});
    CHECK(s.Score({6, 9}) == model::PoolAndScore(m.config, m.params, enc.hidden, Pooling::kClsToken).item());
    std::vector<TokenSeq> hyps = {{6}, {7, 8}, {9, 9, 9}};
    s.ResetForwardCount();
    s.ScoreTokens(hyps);
    CHECK(s.forward_count() == 3);
  }
  SUBCASE("zero head gives zero for every hypothesis") {
    for (double &v : m.params.at("head.wf").mutable_values()) v = 0.0;
    Scorer s(ScorerKind::kPooledCls, Share(m));
    for (double x : s.ScoreTexts({"w1", "w2 w3", "w0 w0 w0 w0"})) CHECK(x == 0.0);
  }
  SUBCASE("wrong model is a config error") {
    CHECK_THROWS_AS(Scorer(ScorerKind::kCausalLl, Share(m)), Error);
    model::Model plain = TinyModel(Variant::kBidirectional);
    CHECK_ERROR_KIND(Scorer(ScorerKind::kPooledCls, Share(plain)), ErrorKind::kConfig);
  }
}

TEST_CASE("forward pass counts per n-best") {
  model::Model c = TinyModel(Variant::kCausal);
  model::Model b = TinyModel(Variant::kBidirectional);
  std::vector<TokenSeq> hyps(10, TokenSeq(64, 7));
  Scorer ll(ScorerKind::kCausalLl, Share(c));
  Scorer pll(ScorerKind::kBidirectionalPll, Share(b));
  ll.ScoreTokens(hyps);
  pll.ScoreTokens(hyps);
  CHECK(ll.forward_count() == 10);
  CHECK(pll.forward_count() == 640);
}

TEST_CASE("batched scoring equals one-at-a-time scoring") {
  for (auto kind : kAllScorerKinds) {
    model::Model m = TinyModel(RequiredVariant(kind), RequiredPooling(kind));
    Scorer s(kind, Share(m));
    std::vector<TokenSeq> hyps = {{6, 7}, {8}, {9, 10, 11, 12}};
    auto all = s.ScoreTokens(hyps);
    for (std::size_t i = 0; i < hyps.size(); ++i) CHECK(all[i] == s.Score(hyps[i]));
  }
}

TEST_CASE("interpolation") {
  CHECK(Interpolate(-3.2, -10.0, 0.5) == doctest::Approx(-8.2).epsilon(1e-15));
  CHECK(Interpolate(-3.2, -10.0, 0.0) == -3.2);
  CHECK_ERROR_KIND(Interpolate(0, 0, -1), ErrorKind::kContract);
}

TEST_CASE("ranking and selection") {
  SUBCASE("single hypothesis") {
    NBestEntry e = Entry({{"w0", -5.0}});
    std::vector<double> lm = {-100.0};
    CHECK(RescoreWithScores(e, lm, 1.0).selected == 0);
  }
  SUBCASE("tied lm scores fall back to am") {
    NBestEntry e = Entry({{"a", -3.0}, {"b", -1.0}, {"c", -2.0}});
    std::vector<double> lm = {-1.0, -1.0, -1.0};
    CHECK(RescoreWithScores(e, lm, 0.0).selected == 1);
    std::vector<double> interp = {0.0, 0.0}, am = {-1.0, -1.0};
    CHECK(RankByScores(interp, am) == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("large lambda follows the acoustic ranking") {
    NBestEntry e = Entry({{"a", -3.0}, {"b", -1.0}, {"c", -2.0}});
    std::vector<double> lm = {50.0, -40.0, 10.0};
    CHECK(RescoreWithScores(e, lm, 1e6).ranking == std::vector<std::size_t>{1, 2, 0});
    CHECK(RescoreWithScores(e, lm, 0.0).ranking == std::vector<std::size_t>{0, 2, 1});
  }
  SUBCASE("random lists select the brute-force argmax and ignore shifts") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
      NBestEntry e;
      std::vector<double> lm;
      for (int i = 0; i < 10; ++i) {
        e.hyps.push_back({"h" + std::to_string(i), n(rng)});
        lm.push_back(n(rng));
      }
      const double lambda = 0.3 * (trial % 5);
      std::size_t best = 0;
      for (std::size_t i = 1; i < 10; ++i)
        if (lm[i] + lambda * e.hyps[i].am_score > lm[best] + lambda * e.hyps[best].am_score) best = i;
      auto r = RescoreWithScores(e, lm, lambda);
      CHECK(r.selected == best);
      std::vector<double> shifted = lm;
      for (double &x : shifted) x += 1234.5;
      CHECK(RescoreWithScores(e, shifted, lambda).selected == best);
      double total = 0;
      for (const auto &h : r.hyps) total += *h.posterior;
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
  SUBCASE("lambda zero ranks by causal log-likelihood") {
    model::Model m = TinyModel(Variant::kCausal, Pooling::kNone, 8);
    Scorer s(ScorerKind::kCausalLl, Share(m));
    NBestEntry e = Entry({{"w0 w1", -1}, {"w2", -2}, {"w3 w4 w5", -3}, {"w6 w7", -4}});
    auto r = RescoreNBest(s, e, 0.0);
    std::vector<std::size_t> order(4);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> ll;
    for (const auto &h : e.hyps) ll.push_back(s.ScoreText(h.text));
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ll[a] > ll[b]; });
    CHECK(r.ranking == order);
  }
  SUBCASE("empty n-best") {
    NBestEntry e;
    CHECK_THROWS_AS(RescoreWithScores(e, {}, 0.0), Error);
  }
}

TEST_CASE("corpus scoring is independent of the thread count") {
  model::Model m = TinyModel(Variant::kCausal, Pooling::kNone, 8);
  Scorer s(ScorerKind::kCausalLl, Share(m));
  std::vector<NBestEntry> entries;
  for (int u = 0; u < 7; ++u)
    entries.push_back(Entry({{"w" + std::to_string(u) + " w1", -1}, {"w2 w3", -2}}));
  CHECK(ScoreCorpus(s, entries, 1) == ScoreCorpus(s, entries, 3));
}

TEST_CASE("n-best files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rescore_nbest_test";
  fs::create_directories(dir);
  const std::string path = (dir / "dev.jsonl").string();
  std::vector<NBestEntry> entries = {Entry({{"w0 w1", -1.5}, {"w0", -2.25}})};
  entries[0].hyps[1].padding = true;
  WriteNBestFile(path, entries);
  auto back = ReadNBestFile(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].hyps[0].text == "w0 w1");
  CHECK(back[0].hyps[1].am_score == -2.25);
  CHECK(back[0].hyps[1].padding);

  auto annotated = Annotate(entries, {{-1.0, -3.0}}, 1.0);
  CHECK(*annotated[0].selected == 0);
  CHECK(*annotated[0].hyps[1].interp_score == -5.25);
  CHECK(*annotated[0].hyps[1].rank == 1);
  WriteNBestFile(path, annotated);
  CHECK(*ReadNBestFile(path)[0].selected == 0);

  {
    std::ofstream f(path);
    f << FormatNBestLine(entries[0]) << "\n\n{\"utt_id\": \"x\", \"ref\": \"a\", \"hyps\": [{\"text\": 3, \"am_score\": 0}]}\n";
  }
  try {
    ReadNBestFile(path);
    FAIL("expected a parse error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_ERROR_KIND(ReadNBestFile((dir / "nope.jsonl").string()), ErrorKind::kUsage);
  CHECK_ERROR_KIND(ParseNBestLine("{\"utt_id\": \"x\", \"ref\": \"a\", \"hyps\": []}", "t"), ErrorKind::kParse);
  CHECK(LooksLikeTestPath("/data/run/gen/test.nbest.jsonl"));
  CHECK_FALSE(LooksLikeTestPath("/data/test-runs/dev.nbest.jsonl"));
  fs::remove_all(dir);
}
