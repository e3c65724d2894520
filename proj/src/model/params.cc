// model/params.cc

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

#include "model/params.h"

#include <random>

#include "common/error.h"
#include "common/rng.h"

namespace rescore {
namespace model {

namespace {

std::string LayerName(std::size_t l, const std::string &suffix) {
  return "layer." + std::to_string(l) + "." + suffix;
}

ParamLayout HeadLayout(const ModelConfig &c) {
  ParamLayout layout;
  if (c.pooling == Pooling::kNone) return layout;
  const std::size_t d = c.d_model, dk = c.d_k();
  layout.push_back({"head.wf", {d, 1}});
  layout.push_back({"head.bf", {1}});
  if (c.pooling == Pooling::kAttention) {
    layout.push_back({"head.query", {1, d}});
    layout.push_back({"head.wq", {d, dk}});
    layout.push_back({"head.wk", {d, dk}});
    layout.push_back({"head.wv", {d, d}});
  }
  return layout;
}

bool IsBias(const std::string &name) {
  auto ends_with = [&](const std::string &s) {
    return name.size() >= s.size() &&
           name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  return ends_with(".bias") || ends_with(".bq") || ends_with(".bk") ||
         ends_with(".bv") || ends_with(".bo") || ends_with(".b1") ||
         ends_with(".b2") || ends_with(".bf");
}

bool IsGain(const std::string &name) {
  return name.size() >= 5 && name.compare(name.size() - 5, 5, ".gain") == 0;
}

diff::Tensor InitTensor(const std::string &name, const diff::Shape &shape,
                        double std_dev, Rng &rng) {
  diff::Tensor t = diff::Tensor::Zeros(shape, true);
  if (IsGain(name)) {
    for (double &v : t.mutable_values()) v = 1.0;
  } else if (!IsBias(name)) {
    std::normal_distribution<double> normal(0.0, std_dev);
    for (double &v : t.mutable_values()) v = normal(rng);
  }
  return t;
}

}  // namespace

ParamLayout ExpectedLayout(const ModelConfig &c) {
  const std::size_t d = c.d_model, dk = c.d_k(), v = c.vocab_size;
  ParamLayout layout;
  layout.push_back({"tok_emb", {v, d}});
  layout.push_back({"pos_emb", {c.position_rows(), d}});
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    layout.push_back({LayerName(l, "ln1.gain"), {d}});
    layout.push_back({LayerName(l, "ln1.bias"), {d}});
    for (std::size_t h = 0; h < c.n_heads; ++h) {
      std::string p = "attn.h" + std::to_string(h) + ".";
      layout.push_back({LayerName(l, p + "wq"), {d, dk}});
      layout.push_back({LayerName(l, p + "bq"), {dk}});
      layout.push_back({LayerName(l, p + "wk"), {d, dk}});
      layout.push_back({LayerName(l, p + "bk"), {dk}});
      layout.push_back({LayerName(l, p + "wv"), {d, dk}});
      layout.push_back({LayerName(l, p + "bv"), {dk}});
      layout.push_back({LayerName(l, p + "wo"), {dk, d}});
    }
    layout.push_back({LayerName(l, "attn.bo"), {d}});
    layout.push_back({LayerName(l, "ln2.gain"), {d}});
    layout.push_back({LayerName(l, "ln2.bias"), {d}});
    layout.push_back({LayerName(l, "ff.w1"), {d, c.d_ff}});
    layout.push_back({LayerName(l, "ff.b1"), {c.d_ff}});
    layout.push_back({LayerName(l, "ff.w2"), {c.d_ff, d}});
    layout.push_back({LayerName(l, "ff.b2"), {d}});
  }
  layout.push_back({"final_ln.gain", {d}});
  layout.push_back({"final_ln.bias", {d}});
  layout.push_back({"lm_out.bias", {v}});
  if (!c.tied_output()) layout.push_back({"lm_out.weight", {d, v}});
  for (auto &entry : HeadLayout(c)) layout.push_back(std::move(entry));
  return layout;
}

std::size_t AnalyticParameterCount(const ModelConfig &c) {
  const std::size_t d = c.d_model, dk = c.d_k(), v = c.vocab_size,
                    h = c.n_heads, ff = c.d_ff;
  std::size_t per_layer = 4 * d                       // two layer norms
                          + h * (3 * (d * dk + dk) + dk * d) + d  // attention
                          + d * ff + ff + ff * d + d;             // feed-forward
  std::size_t count = v * d + c.position_rows() * d + c.n_layers * per_layer +
                      2 * d + v;
  if (!c.tied_output()) count += d * v;
  if (c.pooling != Pooling::kNone) count += d + 1;
  if (c.pooling == Pooling::kAttention) count += d + 2 * d * dk + d * d;
  return count;
}

ModelParams ModelParams::Init(const ModelConfig &config) {
  config.Validate();
  Rng rng = MakeRng(config.init_seed, {0x6d6f64656cULL});
  ModelParams params;
  for (const auto &[name, shape] : ExpectedLayout(config))
    params.tensors_[name] = InitTensor(name, shape, config.init_std, rng);
  return params;
}

diff::Tensor &ModelParams::at(const std::string &name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    Fail(ErrorKind::kConfig, "missing parameter '" + name + "'");
  return it->second;
}

const diff::Tensor &ModelParams::at(const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    Fail(ErrorKind::kConfig, "missing parameter '" + name + "'");
  return it->second;
}

void ModelParams::Set(const std::string &name, diff::Tensor t) {
  tensors_[name] = std::move(t);
}

std::size_t ModelParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto &[name, t] : tensors_) n += t.size();
  return n;
}

ModelParams ModelParams::Clone() const {
  ModelParams copy;
  for (const auto &[name, t] : tensors_) copy.tensors_[name] = t.Clone();
  return copy;
}

void ModelParams::SetRequiresGrad(bool v) {
  for (auto &[name, t] : tensors_) t.set_requires_grad(v);
}

void ModelParams::ZeroGrad() {
  for (auto &[name, t] : tensors_) t.ZeroGrad();
}

void ValidateParams(const ModelConfig &config, const ModelParams &params) {
  ParamLayout layout = ExpectedLayout(config);
  if (layout.size() != params.tensors().size())
    Fail(ErrorKind::kConfig,
         "parameter map has " + std::to_string(params.tensors().size()) +
             " tensors, config implies " + std::to_string(layout.size()));
  for (const auto &[name, shape] : layout) {
    if (!params.contains(name))
      Fail(ErrorKind::kConfig, "missing parameter '" + name + "'");
    if (params.at(name).shape() != shape)
      Fail(ErrorKind::kConfig, "parameter '" + name + "' has shape " +
                                   diff::ShapeString(params.at(name).shape()) +
                                   ", expected " + diff::ShapeString(shape));
  }
}

void AttachHead(ModelConfig &config, ModelParams &params, Pooling pooling,
                std::uint64_t seed) {
  ModelConfig next = config;
  next.pooling = pooling;
  next.Validate();
  for (const auto &[name, shape] : HeadLayout(config)) params.Erase(name);
  Rng rng = MakeRng(seed, {0x68656164ULL});
  for (const auto &[name, shape] : HeadLayout(next))
    params.Set(name, InitTensor(name, shape, next.init_std, rng));
  config = next;
}

}  // namespace model
}  // namespace rescore
