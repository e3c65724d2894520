// model/config.cc

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

#include "model/config.h"

#include "common/error.h"

namespace rescore {
namespace model {

const char *VariantName(Variant v) {
  return v == Variant::kCausal ? "causal" : "bidirectional";
}

const char *PoolingName(Pooling p) {
  switch (p) {
    case Pooling::kNone: return "none";
    case Pooling::kLastToken: return "last_token";
    case Pooling::kClsToken: return "cls_token";
    case Pooling::kAttention: return "attention";
  }
  return "none";
}

Variant ParseVariant(const std::string &s) {
  if (s == "causal") return Variant::kCausal;
  if (s == "bidirectional") return Variant::kBidirectional;
  Fail(ErrorKind::kConfig, "unknown model variant '" + s + "'");
}

Pooling ParsePooling(const std::string &s) {
  if (s == "none") return Pooling::kNone;
  if (s == "last_token") return Pooling::kLastToken;
  if (s == "cls_token") return Pooling::kClsToken;
  if (s == "attention") return Pooling::kAttention;
  Fail(ErrorKind::kConfig, "unknown pooling '" + s + "'");
}

bool PoolingCompatible(Variant v, Pooling p) {
  if (p == Pooling::kLastToken) return v == Variant::kCausal;
  if (p == Pooling::kClsToken) return v == Variant::kBidirectional;
  return true;
}

void ModelConfig::Validate() const {
  auto fail = [](const std::string &m) { Fail(ErrorKind::kConfig, m); };
  if (vocab_size <= special::kCount)
    fail("vocab_size must exceed the " + std::to_string(special::kCount) +
         " reserved special tokens");
  if (d_model == 0 || n_heads == 0 || n_layers == 0 || d_ff == 0 ||
      max_len == 0)
    fail("model dimensions must be positive");
  if (d_model % n_heads != 0)
    fail("d_model (" + std::to_string(d_model) +
         ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
  if (!PoolingCompatible(variant, pooling))
    fail(std::string("pooling '") + PoolingName(pooling) +
         "' is not defined for the " + VariantName(variant) + " variant");
  if (!(init_std > 0.0)) fail("init_std must be positive");
}

Json ToJson(const ModelConfig &c) {
  Json j;
  j["vocab_size"] = c.vocab_size;
  j["d_model"] = c.d_model;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["d_ff"] = c.d_ff;
  j["max_len"] = c.max_len;
  j["variant"] = VariantName(c.variant);
  j["pooling"] = PoolingName(c.pooling);
  j["init_std"] = c.init_std;
  j["init_seed"] = c.init_seed;
  return j;
}

ModelConfig ModelConfigFromJson(const Json &j) {
  ModelConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.max_len = j.value("max_len", c.max_len);
  c.variant = ParseVariant(j.value("variant", std::string("causal")));
  c.pooling = ParsePooling(j.value("pooling", std::string("none")));
  c.init_std = j.value("init_std", c.init_std);
  c.init_seed = j.value("init_seed", c.init_seed);
  return c;
}

}  // namespace model
}  // namespace rescore
