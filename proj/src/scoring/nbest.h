// scoring/nbest.h

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

#ifndef RESCORE_SCORING_NBEST_H_
#define RESCORE_SCORING_NBEST_H_

#include <optional>
#include <string>
#include <vector>

#include "common/json.h"

namespace rescore {
namespace scoring {

struct Hypothesis {
  std::string text;
  double am_score = 0.0;
  // Set by the channel simulator on filler hypotheses.
  bool padding = false;
  // Filled in by rescoring.
  std::optional<double> lm_score;
  std::optional<double> interp_score;
  std::optional<std::size_t> rank;
};

struct NBestEntry {
  std::string utt_id;
  std::string ref;
  std::vector<Hypothesis> hyps;
  std::optional<std::size_t> selected;
  // The simulator could not produce the requested number of hypotheses.
  bool short_list = false;
};

// One JSON object per line:
//   {"utt_id": str, "ref": str, "hyps": [{"text": str, "am_score": num}, ...]}
// Rescored files additionally carry per-hypothesis lm_score, interp_score and
// rank, and a per-record "selected" index. Unknown keys are ignored.
//
// A missing file is a usage error; schema violations are parse errors that
// name the file and line.
std::vector<NBestEntry> ReadNBestFile(const std::string &path);
NBestEntry ParseNBestLine(const std::string &line, const std::string &where);

void WriteNBestFile(const std::string &path,
                    const std::vector<NBestEntry> &entries);
std::string FormatNBestLine(const NBestEntry &entry);

// Plain-text corpus, one sentence per line.
std::vector<std::string> ReadLines(const std::string &path);
void WriteLines(const std::string &path, const std::vector<std::string> &lines);

// Rejects paths that look like held-out test data; see the trainer.
bool LooksLikeTestPath(const std::string &path);

}  // namespace scoring
}  // namespace rescore

#endif  // RESCORE_SCORING_NBEST_H_
