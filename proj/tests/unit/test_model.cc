// tests/unit/test_model.cc

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
#include <filesystem>
#include <fstream>
#include <random>

#include "diffcore/grad_check.h"
#include "diffcore/ops.h"
#include "doctest.h"
#include "helpers.h"
#include "model/checkpoint.h"
#include "model/params.h"
#include "model/transformer.h"

using namespace rescore;
using namespace rescore::model;
using testing::TinyModel;

namespace {

TokenSeq Causal(std::initializer_list<TokenId> content) {
  TokenSeq t{special::kBos};
  t.insert(t.end(), content);
  t.push_back(special::kEos);
  return t;
}

void CheckClose(const testing::Mat &a, const diff::Tensor &b, double tol) {
  REQUIRE(a.size() == b.rows());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      CHECK(std::abs(a[i][j] - b.at(i, j)) < tol);
}

}  // namespace

TEST_CASE("config invariants") {
  ModelConfig c;
  c.vocab_size = 20;
  c.Validate();
  c.n_heads = 3;
  CHECK_ERROR_KIND(c.Validate(), ErrorKind::kConfig);
  c.n_heads = 4;
  c.pooling = Pooling::kClsToken;
  CHECK_ERROR_KIND(c.Validate(), ErrorKind::kConfig);
  c.variant = Variant::kBidirectional;
  c.Validate();
  c.pooling = Pooling::kLastToken;
  CHECK_ERROR_KIND(c.Validate(), ErrorKind::kConfig);
  CHECK(PoolingCompatible(Variant::kCausal, Pooling::kAttention));
  CHECK(PoolingCompatible(Variant::kBidirectional, Pooling::kAttention));
}

TEST_CASE("vocabulary reserves special ids") {
  Vocabulary v({"a", "b", "a"});
  CHECK(v.size() == special::kCount + 2);
  CHECK(v.Id("a") == special::kCount);
  CHECK(v.Id("zzz") == special::kUnk);
  CHECK(v.Word(special::kBos) == "<s>");
  CHECK_ERROR_KIND(Vocabulary({"<mask>"}), ErrorKind::kConfig);
}

TEST_CASE("parameter count equals the analytic count") {
  for (auto v : {Variant::kCausal, Variant::kBidirectional})
    for (auto p : {Pooling::kNone, Pooling::kLastToken, Pooling::kClsToken, Pooling::kAttention}) {
      if (!PoolingCompatible(v, p)) continue;
      Model m = TinyModel(v, p, 11, 8, 2, 2);
      CHECK(m.params.ParameterCount() == AnalyticParameterCount(m.config));
      ValidateParams(m.config, m.params);
    }
}

TEST_CASE("causal forward matches a manual forward pass") {
  Model m = TinyModel(Variant::kCausal, Pooling::kNone, 4, 4, 1, 1);
  testing::HandSet(m.params);
  TokenSeq t = {special::kBos, 7};
  ForwardOutput out = ForwardCausal(m.config, m.params, t);
  testing::ManualOutput ref = testing::ManualForward(m, t);
  CheckClose(ref.logits, out.logits, 1e-12);
  CheckClose(ref.hidden, out.hidden, 1e-12);
}

TEST_CASE("bidirectional forward matches a manual forward pass") {
  Model m = TinyModel(Variant::kBidirectional, Pooling::kNone, 5, 4, 1, 2);
  testing::HandSet(m.params);
  TokenSeq t = {special::kCls, 6, 8};
  const std::size_t mask[] = {2};
  ForwardOutput out = ForwardBidirectional(m.config, m.params, t, mask);
  TokenSeq masked = {special::kCls, 6, special::kMask};
  testing::ManualOutput ref = testing::ManualForward(m, masked);
  CheckClose(ref.logits, out.logits, 1e-12);
}

TEST_CASE("causal logits ignore future tokens") {
  Model m = TinyModel(Variant::kCausal, Pooling::kNone, 6, 8, 2, 2);
  std::mt19937_64 rng(3);
  for (std::size_t L = 2; L <= 8; ++L) {
    TokenSeq t(L);
    t[0] = special::kBos;
    for (std::size_t i = 1; i < L; ++i) t[i] = special::kCount + rng() % 6;
    diff::Tensor base = ForwardCausal(m.config, m.params, t).logits;
    for (std::size_t p = 1; p < L; ++p) {
      TokenSeq u = t;
      u[p] = special::kCount + (t[p] - special::kCount + 1) % 6;
      diff::Tensor changed = ForwardCausal(m.config, m.params, u).logits;
      for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < base.cols(); ++c)
          REQUIRE(base.at(r, c) == changed.at(r, c));
    }
  }
}

TEST_CASE("fresh model logits are finite and normalize") {
  Model m = TinyModel(Variant::kCausal);
  diff::Tensor logits = ForwardCausal(m.config, m.params, Causal({6, 7, 8})).logits;
  diff::Tensor p = diff::Softmax(logits);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
      CHECK(std::isfinite(logits.at(r, c)));
      s += p.at(r, c);
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("masked position ignores its original token") {
  Model m = TinyModel(Variant::kBidirectional);
  const std::size_t mask[] = {2};
  diff::Tensor a = ForwardBidirectional(m.config, m.params, {special::kCls, 6, 7, 8}, mask).logits;
  diff::Tensor b = ForwardBidirectional(m.config, m.params, {special::kCls, 6, 9, 8}, mask).logits;
  CHECK(testing::Vec(a) == testing::Vec(b));
  ForwardOutput none = ForwardBidirectional(m.config, m.params, {special::kCls, 6}, {});
  CHECK(none.hidden.rows() == 2);
}

TEST_CASE("forward errors") {
  Model c = TinyModel(Variant::kCausal);
  Model b = TinyModel(Variant::kBidirectional);
  TokenSeq overlong(c.config.max_len + 3, 6);
  overlong[0] = special::kBos;
  CHECK_ERROR_KIND(ForwardCausal(c.config, c.params, overlong), ErrorKind::kLength);
  CHECK_ERROR_KIND(ForwardCausal(c.config, c.params, {special::kBos, 999}), ErrorKind::kVocab);
  CHECK_ERROR_KIND(ForwardCausal(c.config, c.params, {6, 7}), ErrorKind::kContract);
  CHECK_ERROR_KIND(ForwardCausal(b.config, b.params, {special::kBos, 7}), ErrorKind::kConfig);
  const std::size_t bad[] = {5};
  CHECK_ERROR_KIND(ForwardBidirectional(b.config, b.params, {special::kCls, 7}, bad),
                   ErrorKind::kContract);
  CHECK_ERROR_KIND(PoolAndScore(c.config, c.params, diff::Tensor::Matrix(1, 8, std::vector<double>(8)),
                                Pooling::kClsToken),
                   ErrorKind::kConfig);
}

TEST_CASE("pooling heads") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  auto random_h = [&](std::size_t rows, std::size_t d) {
    std::vector<double> v(rows * d);
    for (double &x : v) x = n(rng);
    return diff::Tensor::Matrix(rows, d, v);
  };

  SUBCASE("single-key attention returns the value row") {
    Model m = TinyModel(Variant::kCausal, Pooling::kAttention, 6, 4, 1, 2);
    diff::Tensor h = random_h(1, 4);
    diff::Tensor w = AttentionPoolingWeights(m.config, m.params, h);
    CHECK(w.at(0) == 1.0);
    auto hv = testing::MatMul(testing::Get(h), testing::Get(m.params.at("head.wv")));
    double expect = m.params.at("head.bf").at(0);
    for (std::size_t j = 0; j < 4; ++j) expect += hv[0][j] * m.params.at("head.wf").at(j, 0);
    CHECK(std::abs(PoolAndScore(m.config, m.params, h, Pooling::kAttention).item() - expect) < 1e-12);
  }

  SUBCASE("zero head scores zero") {
    Model m = TinyModel(Variant::kBidirectional, Pooling::kClsToken);
    for (double &v : m.params.at("head.wf").mutable_values()) v = 0.0;
    CHECK(PoolAndScore(m.config, m.params, random_h(3, 8), Pooling::kClsToken).item() == 0.0);
  }

  SUBCASE("attention pooling matches dense algebra") {
    Model m = TinyModel(Variant::kCausal, Pooling::kAttention, 6, 4, 1, 2);
    diff::Tensor h = random_h(3, 4);
    auto H = testing::Get(h);
    auto q = testing::MatMul(testing::Get(m.params.at("head.query")), testing::Get(m.params.at("head.wq")));
    auto K = testing::MatMul(H, testing::Get(m.params.at("head.wk")));
    auto V = testing::MatMul(H, testing::Get(m.params.at("head.wv")));
    auto s = testing::MatMul(q, testing::Transposed(K));
    for (double &x : s[0]) x /= std::sqrt(2.0);
    auto a = testing::SoftmaxRows(s);
    double sum_w = 0;
    for (double x : a[0]) {
      CHECK(x >= 0.0);
      sum_w += x;
    }
    CHECK(std::abs(sum_w - 1.0) < 1e-12);
    auto pooled = testing::MatMul(a, V);
    double expect = m.params.at("head.bf").at(0);
    for (std::size_t j = 0; j < 4; ++j) expect += pooled[0][j] * m.params.at("head.wf").at(j, 0);
    CHECK(std::abs(PoolAndScore(m.config, m.params, h, Pooling::kAttention).item() - expect) < 1e-12);
  }

  SUBCASE("last and cls pick their rows") {
    Model last = TinyModel(Variant::kCausal, Pooling::kLastToken, 6, 4, 1, 2);
    Model cls = TinyModel(Variant::kBidirectional, Pooling::kClsToken, 6, 4, 1, 2);
    diff::Tensor h = random_h(3, 4);
    auto dot = [&](const Model &m, std::size_t row) {
      double s = m.params.at("head.bf").at(0);
      for (std::size_t j = 0; j < 4; ++j) s += h.at(row, j) * m.params.at("head.wf").at(j, 0);
      return s;
    };
    CHECK(std::abs(PoolAndScore(last.config, last.params, h, Pooling::kLastToken).item() - dot(last, 2)) < 1e-12);
    CHECK(std::abs(PoolAndScore(cls.config, cls.params, h, Pooling::kClsToken).item() - dot(cls, 0)) < 1e-12);
  }
}

TEST_CASE("pool_and_score gradients") {
  Model m = TinyModel(Variant::kCausal, Pooling::kAttention, 6, 4, 1, 2);
  diff::Tensor h = diff::Tensor::Matrix(3, 4, {0.1, -0.4, 0.3, 0.9, -0.2, 0.5, 0.7, -0.1, 0.3, 0.2, -0.6, 0.4}, true);
  std::vector<diff::Tensor> leaves = {h};
  for (const char *n : {"head.query", "head.wq", "head.wk", "head.wv", "head.wf", "head.bf"})
    leaves.push_back(m.params.at(n));
  auto r = diff::GradCheck([&] { return PoolAndScore(m.config, m.params, h, Pooling::kAttention); },
                           leaves, 1e-4, 1e-3);
  CHECK(r.pass);
}

TEST_CASE("attach head keeps the body") {
  Model m = TinyModel(Variant::kBidirectional);
  auto before = testing::Vec(m.params.at("tok_emb"));
  AttachHead(m.config, m.params, Pooling::kClsToken, 4);
  CHECK(m.config.pooling == Pooling::kClsToken);
  CHECK(testing::Vec(m.params.at("tok_emb")) == before);
  ValidateParams(m.config, m.params);
  AttachHead(m.config, m.params, Pooling::kAttention, 4);
  ValidateParams(m.config, m.params);
}

TEST_CASE("checkpoint round trip is bit exact") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rescore_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  Model m = TinyModel(Variant::kCausal, Pooling::kAttention, 7, 8, 2, 2);
  Checkpoint ck{m, {{"step", 3}}, {{"optim.t", diff::Tensor::Scalar(5.0)}}};
  SaveCheckpoint(path, ck);
  Checkpoint back = LoadCheckpoint(path);
  CHECK(ToJson(back.model.config) == ToJson(m.config));
  CHECK(back.model.vocab.words() == m.vocab.words());
  CHECK(back.metadata["step"] == 3);
  CHECK(back.extras.at("optim.t").item() == 5.0);
  for (const auto &[name, t] : m.params.tensors())
    CHECK(testing::Vec(back.model.params.at(name)) == testing::Vec(t));

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(fs::file_size(path) / 2));
    char c;
    f.read(&c, 1);
    f.seekp(-1, std::ios::cur);
    c = static_cast<char>(c ^ 0x5a);
    f.write(&c, 1);
  }
  CHECK_ERROR_KIND(LoadCheckpoint(path), ErrorKind::kParse);
  CHECK_ERROR_KIND(LoadCheckpoint((dir / "missing.ckpt").string()), ErrorKind::kUsage);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "not a checkpoint";
  }
  CHECK_ERROR_KIND(LoadCheckpoint(path), ErrorKind::kParse);
  fs::remove_all(dir);
}
