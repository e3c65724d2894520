// model/config.h

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

#ifndef RESCORE_MODEL_CONFIG_H_
#define RESCORE_MODEL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "common/json.h"

namespace rescore {
namespace model {

using TokenId = std::size_t;
using TokenSeq = std::vector<TokenId>;

// Reserved ids at the bottom of every vocabulary.
namespace special {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kCls = 3;
inline constexpr TokenId kMask = 4;
inline constexpr TokenId kUnk = 5;
inline constexpr std::size_t kCount = 6;
}  // namespace special

enum class Variant { kCausal, kBidirectional };
enum class Pooling { kNone, kLastToken, kClsToken, kAttention };

const char *VariantName(Variant v);
const char *PoolingName(Pooling p);
Variant ParseVariant(const std::string &s);
Pooling ParsePooling(const std::string &s);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  // Maximum hypothesis length in content tokens. Framing tokens (BOS/EOS for
  // causal, CLS for bidirectional) come on top of it.
  std::size_t max_len = 64;
  Variant variant = Variant::kCausal;
  Pooling pooling = Pooling::kNone;
  double init_std = 0.02;
  std::uint64_t init_seed = 1;

  std::size_t d_k() const { return d_model / n_heads; }
  std::size_t position_rows() const { return max_len + 2; }
  // Causal models share the token embedding with the output projection.
  bool tied_output() const { return variant == Variant::kCausal; }

  // Throws ErrorKind::kConfig on any violated invariant.
  void Validate() const;
};

// Pooling/variant compatibility: last_token needs causal, cls_token needs
// bidirectional, attention works with both.
bool PoolingCompatible(Variant v, Pooling p);

Json ToJson(const ModelConfig &c);
ModelConfig ModelConfigFromJson(const Json &j);

}  // namespace model
}  // namespace rescore

#endif  // RESCORE_MODEL_CONFIG_H_
