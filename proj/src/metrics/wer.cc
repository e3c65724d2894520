// metrics/wer.cc

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

#include "metrics/wer.h"

#include <algorithm>

#include "common/error.h"

namespace rescore {
namespace metrics {

EditResult EditDistance(const Words &hyp, const Words &ref) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: ref[0..i) against hyp[0..j).
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & {
    return cost[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
    }
  }

  EditResult r;
  r.distance = at(n, m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++r.substitutions;
        --i, --j;
        continue;
      }
    }
    if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++r.insertions;
      --j;
    } else {
      ++r.deletions;
      --i;
    }
  }
  return r;
}

WerReport CorpusWer(const std::vector<std::pair<Words, Words>> &selections) {
  if (selections.empty())
    Fail(ErrorKind::kEmptyInput, "corpus_wer: no utterances");
  WerReport report;
  for (const auto &[hyp, ref] : selections) {
    UtteranceErrors u{EditDistance(hyp, ref), ref.size()};
    report.substitutions += u.errors.substitutions;
    report.insertions += u.errors.insertions;
    report.deletions += u.errors.deletions;
    report.reference_word_count += ref.size();
    report.per_utterance.push_back(u);
  }
  if (report.reference_word_count == 0)
    Fail(ErrorKind::kEmptyInput, "corpus_wer: references contain no words");
  report.wer = static_cast<double>(report.substitutions + report.insertions +
                                   report.deletions) /
               static_cast<double>(report.reference_word_count);
  return report;
}

std::size_t OracleIndex(const std::vector<Words> &hyps, const Words &ref) {
  if (hyps.empty()) Fail(ErrorKind::kEmptyInput, "oracle: empty n-best");
  std::size_t best = 0, best_d = EditDistance(hyps[0], ref).distance;
  for (std::size_t i = 1; i < hyps.size() && best_d > 0; ++i) {
    std::size_t d = EditDistance(hyps[i], ref).distance;
    if (d < best_d) best = i, best_d = d;
  }
  return best;
}

WerReport OracleWer(const std::vector<std::vector<Words>> &hyps,
                    const std::vector<Words> &refs) {
  if (hyps.size() != refs.size())
    Fail(ErrorKind::kContract, "oracle_wer: " + std::to_string(hyps.size()) +
                                   " n-best lists for " +
                                   std::to_string(refs.size()) + " references");
  std::vector<std::pair<Words, Words>> selections;
  selections.reserve(refs.size());
  for (std::size_t u = 0; u < refs.size(); ++u)
    selections.emplace_back(hyps[u][OracleIndex(hyps[u], refs[u])], refs[u]);
  return CorpusWer(selections);
}

double RelativeWerr(double baseline_wer, double system_wer) {
  if (!(baseline_wer > 0.0))
    Fail(ErrorKind::kContract, "relative_werr: baseline WER must be positive");
  return 100.0 * (baseline_wer - system_wer) / baseline_wer;
}

Json ToJson(const WerReport &r, bool per_utterance) {
  Json j;
  j["wer"] = r.wer;
  j["substitutions"] = r.substitutions;
  j["insertions"] = r.insertions;
  j["deletions"] = r.deletions;
  j["reference_word_count"] = r.reference_word_count;
  if (per_utterance) {
    Json list = Json::array();
    for (const auto &u : r.per_utterance)
      list.push_back({{"distance", u.errors.distance},
                      {"substitutions", u.errors.substitutions},
                      {"insertions", u.errors.insertions},
                      {"deletions", u.errors.deletions},
                      {"reference_words", u.reference_words}});
    j["per_utterance"] = std::move(list);
  }
  return j;
}

}  // namespace metrics
}  // namespace rescore
