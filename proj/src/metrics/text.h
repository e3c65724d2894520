// metrics/text.h

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

#ifndef RESCORE_METRICS_TEXT_H_
#define RESCORE_METRICS_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace rescore {
namespace metrics {

// Lowercases ASCII letters, drops ASCII punctuation and collapses runs of
// whitespace to single spaces (no leading/trailing space). Bytes >= 0x80 are
// kept as-is.
std::string NormalizeText(std::string_view text);

// NormalizeText followed by a split on spaces.
std::vector<std::string> NormalizedWords(std::string_view text);

std::string JoinWords(const std::vector<std::string> &words);

}  // namespace metrics
}  // namespace rescore

#endif  // RESCORE_METRICS_TEXT_H_
