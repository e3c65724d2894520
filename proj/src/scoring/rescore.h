// scoring/rescore.h

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

#ifndef RESCORE_SCORING_RESCORE_H_
#define RESCORE_SCORING_RESCORE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrics/wer.h"
#include "model/config.h"
#include "scoring/nbest.h"
#include "scoring/scorer.h"

namespace rescore {
namespace scoring {

struct ScoredHypothesis {
  model::TokenSeq tokens;
  metrics::Words words;
  double am_score = 0.0;
  double lm_score = 0.0;
  double interp_score = 0.0;
  std::optional<double> posterior;
};

// lm + lambda * am. lambda must be >= 0.
double Interpolate(double lm_score, double am_score, double lambda);

// Hypothesis indices from best to worst: higher score first, then higher
// am_score, then lower original index.
std::vector<std::size_t> RankByScores(std::span<const double> interp_scores,
                                      std::span<const double> am_scores);

// Softmax over the n-best, computed with max subtraction.
std::vector<double> Posteriors(std::span<const double> interp_scores);

struct RescoreResult {
  std::vector<ScoredHypothesis> hyps;  // original n-best order
  std::vector<std::size_t> ranking;    // best first
  std::size_t selected = 0;
};

// Selection from precomputed LM scores.
RescoreResult RescoreWithScores(const NBestEntry &entry,
                                std::span<const double> lm_scores,
                                double lambda);

RescoreResult RescoreNBest(const Scorer &scorer, const NBestEntry &entry,
                           double lambda);

// LM scores for every hypothesis of every entry; utterances are spread over
// `threads` workers and the result does not depend on the thread count.
std::vector<std::vector<double>> ScoreCorpus(const Scorer &scorer,
                                             const std::vector<NBestEntry> &entries,
                                             int threads);

// Index chosen per utterance under lambda.
std::vector<std::size_t> SelectAll(const std::vector<NBestEntry> &entries,
                                   const std::vector<std::vector<double>> &lm_scores,
                                   double lambda);

// Copy of `entries` annotated with lm_score, interp_score, rank, selected.
std::vector<NBestEntry> Annotate(const std::vector<NBestEntry> &entries,
                                 const std::vector<std::vector<double>> &lm_scores,
                                 double lambda);

// Corpus WER of the chosen hypotheses.
metrics::WerReport SelectionWer(const std::vector<NBestEntry> &entries,
                                const std::vector<std::size_t> &selected);

// Selections of the first pass alone (rank 0 by am_score).
std::vector<std::size_t> FirstPassSelections(const std::vector<NBestEntry> &entries);

metrics::WerReport OracleWer(const std::vector<NBestEntry> &entries);

}  // namespace scoring
}  // namespace rescore

#endif  // RESCORE_SCORING_RESCORE_H_
