// metrics/wer.h

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

#ifndef RESCORE_METRICS_WER_H_
#define RESCORE_METRICS_WER_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "common/json.h"

namespace rescore {
namespace metrics {

using Words = std::vector<std::string>;

struct EditResult {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
};

// Unit-cost Levenshtein alignment of hyp against ref. Among optimal
// alignments the backtrace prefers substitution, then insertion, then
// deletion.
EditResult EditDistance(const Words &hyp, const Words &ref);

struct UtteranceErrors {
  EditResult errors;
  std::size_t reference_words = 0;
};

struct WerReport {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_word_count = 0;
  double wer = 0.0;
  std::vector<UtteranceErrors> per_utterance;
};

// (hyp, ref) pairs, micro-averaged over reference words.
WerReport CorpusWer(const std::vector<std::pair<Words, Words>> &selections);

// Index of the hypothesis closest to ref; lowest index on ties.
std::size_t OracleIndex(const std::vector<Words> &hyps, const Words &ref);

// hyps[u] is utterance u's n-best, refs[u] its reference.
WerReport OracleWer(const std::vector<std::vector<Words>> &hyps,
                    const std::vector<Words> &refs);

// 100 * (baseline - system) / baseline, WERs in any consistent unit.
double RelativeWerr(double baseline_wer, double system_wer);

Json ToJson(const WerReport &r, bool per_utterance = false);

}  // namespace metrics
}  // namespace rescore

#endif  // RESCORE_METRICS_WER_H_
