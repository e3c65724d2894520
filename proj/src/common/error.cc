// common/error.cc

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

#include "common/error.h"

namespace rescore {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kLength: return "length";
    case ErrorKind::kVocab: return "vocab";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

}  // namespace rescore
