// tests/unit/helpers.h

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

#ifndef RESCORE_TESTS_HELPERS_H_
#define RESCORE_TESTS_HELPERS_H_

#include <cmath>
#include <string>
#include <vector>

#include "common/error.h"
#include "model/transformer.h"

#define CHECK_ERROR_KIND(expr, expected_kind)                   \
  do {                                                          \
    bool caught_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const ::rescore::Error &e_) {                      \
      caught_ = true;                                           \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());   \
    }                                                           \
    CHECK_MESSAGE(caught_, "expected an error from " #expr);    \
  } while (0)

namespace testing {

using Mat = std::vector<std::vector<double>>;

inline std::vector<std::string> Words(std::size_t n) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back("w" + std::to_string(i));
  return w;
}

inline rescore::model::Model TinyModel(rescore::model::Variant variant,
                                       rescore::model::Pooling pooling =
                                           rescore::model::Pooling::kNone,
                                       std::size_t words = 8,
                                       std::size_t d_model = 8,
                                       std::size_t layers = 1,
                                       std::size_t heads = 2,
                                       std::uint64_t seed = 3,
                                       double init_std = 0.3) {
  rescore::model::ModelConfig c;
  c.d_model = d_model;
  c.n_layers = layers;
  c.n_heads = heads;
  c.d_ff = 2 * d_model;
  c.max_len = 64;
  c.variant = variant;
  c.pooling = pooling;
  c.init_std = init_std;
  c.init_seed = seed;
  return rescore::model::MakeModel(c, rescore::model::Vocabulary(Words(words)));
}

// Overwrites every parameter with a fixed pattern so tests do not depend on
// the initializer.
inline void HandSet(rescore::model::ModelParams &p) {
  std::size_t k = 0;
  for (const auto &[name, t] : p.tensors()) {
    rescore::diff::Tensor copy = t;
    for (double &v : copy.mutable_values()) v = 0.5 * std::sin(0.37 * ++k + 0.11);
  }
}

// Straightforward re-derivation of the encoder with plain loops.
inline Mat Get(const rescore::diff::Tensor &t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
  return m;
}

inline std::vector<double> Vec(const rescore::diff::Tensor &t) {
  return {t.values().begin(), t.values().end()};
}

inline Mat MatMul(const Mat &a, const Mat &b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat AddRow(Mat a, const std::vector<double> &b) {
  for (auto &row : a)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  return a;
}

inline Mat Plus(Mat a, const Mat &b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  return a;
}

inline Mat LayerNormRows(const Mat &x, const std::vector<double> &g,
                         const std::vector<double> &b) {
  Mat y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mean = 0, var = 0;
    for (double v : x[i]) mean += v;
    mean /= x[i].size();
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= x[i].size();
    for (std::size_t j = 0; j < x[i].size(); ++j)
      y[i][j] = (x[i][j] - mean) / std::sqrt(var + 1e-5) * g[j] + b[j];
  }
  return y;
}

inline Mat SoftmaxRows(Mat x) {
  for (auto &row : x) {
    double m = row[0], s = 0;
    for (double v : row) m = std::max(m, v);
    for (double &v : row) s += (v = std::exp(v - m));
    for (double &v : row) v /= s;
  }
  return x;
}

inline Mat Transposed(const Mat &a) {
  Mat t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

struct ManualOutput {
  Mat hidden, logits;
};

inline ManualOutput ManualForward(const rescore::model::Model &m,
                                  const rescore::model::TokenSeq &tokens) {
  const auto &c = m.config;
  const auto &p = m.params;
  auto at = [&](const std::string &n) { return Get(p.at(n)); };
  auto vec = [&](const std::string &n) { return Vec(p.at(n)); };
  const std::size_t L = tokens.size(), d = c.d_model;
  Mat tok = at("tok_emb"), pos = at("pos_emb");
  Mat x(L, std::vector<double>(d));
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t j = 0; j < d; ++j) x[t][j] = tok[tokens[t]][j] + pos[t][j];
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const std::string pre = "layer." + std::to_string(l) + ".";
    Mat h = LayerNormRows(x, vec(pre + "ln1.gain"), vec(pre + "ln1.bias"));
    Mat attn(L, std::vector<double>(d, 0.0));
    for (std::size_t hd = 0; hd < c.n_heads; ++hd) {
      const std::string a = pre + "attn.h" + std::to_string(hd) + ".";
      Mat q = AddRow(MatMul(h, at(a + "wq")), vec(a + "bq"));
      Mat k = AddRow(MatMul(h, at(a + "wk")), vec(a + "bk"));
      Mat v = AddRow(MatMul(h, at(a + "wv")), vec(a + "bv"));
      Mat s = MatMul(q, Transposed(k));
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
          s[i][j] /= std::sqrt(static_cast<double>(c.d_k()));
          if (c.variant == rescore::model::Variant::kCausal && j > i) s[i][j] = -1e9;
        }
      attn = Plus(attn, MatMul(MatMul(SoftmaxRows(s), v), at(a + "wo")));
    }
    x = Plus(x, AddRow(attn, vec(pre + "attn.bo")));
    Mat h2 = LayerNormRows(x, vec(pre + "ln2.gain"), vec(pre + "ln2.bias"));
    Mat f = AddRow(MatMul(h2, at(pre + "ff.w1")), vec(pre + "ff.b1"));
    for (auto &row : f)
      for (double &v : row) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    x = Plus(x, AddRow(MatMul(f, at(pre + "ff.w2")), vec(pre + "ff.b2")));
  }
  ManualOutput out;
  out.hidden = LayerNormRows(x, vec("final_ln.gain"), vec("final_ln.bias"));
  Mat w = c.tied_output() ? Transposed(tok) : at("lm_out.weight");
  out.logits = AddRow(MatMul(out.hidden, w), vec("lm_out.bias"));
  return out;
}

inline double LogSoftmaxAt(const std::vector<double> &row, std::size_t k) {
  double m = row[0];
  for (double v : row) m = std::max(m, v);
  double s = 0;
  for (double v : row) s += std::exp(v - m);
  return row[k] - m - std::log(s);
}

}  // namespace testing

#endif  // RESCORE_TESTS_HELPERS_H_
