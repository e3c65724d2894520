// common/error.h

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

#ifndef RESCORE_COMMON_ERROR_H_
#define RESCORE_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace rescore {

// Every failure raised inside the library carries one of these categories.
// The C API maps them onto rs_status codes one to one.
enum class ErrorKind {
  kUsage,       // bad arguments, missing files
  kContract,    // violated precondition (non-scalar loss, empty n-best, ...)
  kDimension,   // tensor shape mismatch
  kLength,      // sequence longer than the model allows
  kVocab,       // token id outside the vocabulary
  kConfig,      // inconsistent configuration
  kEmptyInput,  // nothing to score
  kParse,       // malformed file contents
  kIo,          // filesystem failure
  kNumeric,     // NaN/Inf during training
};

const char *ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &message) {
  throw Error(kind, message);
}

}  // namespace rescore

#endif  // RESCORE_COMMON_ERROR_H_
