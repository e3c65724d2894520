// model/checkpoint.h

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

#ifndef RESCORE_MODEL_CHECKPOINT_H_
#define RESCORE_MODEL_CHECKPOINT_H_

#include <map>
#include <string>

#include "common/json.h"
#include "model/transformer.h"

namespace rescore {
namespace model {

// Checkpoint container, little-endian throughout:
//
//   magic       8 bytes  "RSCKPT\0\0"
//   version     u32      kCheckpointVersion
//   header_len  u64
//   header      JSON     {"config": ..., "vocab": [...], "metadata": ...}
//   n_tensors   u64
//   per tensor: u32 name_len, name, u32 rank, u64 dims[rank],
//               f64 values[prod(dims)]
//   crc32       u32      zlib crc32 of every preceding byte
//
// Model parameters come first in name order, then extra tensors whose names
// start with "optim.".
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  Json metadata = Json::object();
  std::map<std::string, diff::Tensor> extras;
};

// Written to a temporary sibling and renamed into place.
void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt);
// Verifies magic, version, checksum and parameter layout.
Checkpoint LoadCheckpoint(const std::string &path);

inline void SaveModel(const std::string &path, const Model &model,
                      const Json &metadata = Json::object()) {
  SaveCheckpoint(path, Checkpoint{model, metadata, {}});
}
inline Model LoadModel(const std::string &path) {
  return LoadCheckpoint(path).model;
}

}  // namespace model
}  // namespace rescore

#endif  // RESCORE_MODEL_CHECKPOINT_H_
