// scoring/rescore.cc

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

#include "scoring/rescore.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.h"
#include "common/parallel.h"
#include "metrics/text.h"

namespace rescore {
namespace scoring {

double Interpolate(double lm_score, double am_score, double lambda) {
  if (!(lambda >= 0.0))
    Fail(ErrorKind::kContract, "interpolation weight must be >= 0");
  return lm_score + lambda * am_score;
}

std::vector<std::size_t> RankByScores(std::span<const double> interp,
                                      std::span<const double> am) {
  if (interp.size() != am.size())
    Fail(ErrorKind::kContract, "rank: score vectors differ in length");
  std::vector<std::size_t> order(interp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (interp[a] != interp[b]) return interp[a] > interp[b];
    if (am[a] != am[b]) return am[a] > am[b];
    return a < b;
  });
  return order;
}

std::vector<double> Posteriors(std::span<const double> s) {
  if (s.empty()) Fail(ErrorKind::kEmptyInput, "posterior of an empty n-best");
  const double mx = *std::max_element(s.begin(), s.end());
  std::vector<double> p(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += p[i] = std::exp(s[i] - mx);
  for (double &v : p) v /= total;
  return p;
}

RescoreResult RescoreWithScores(const NBestEntry &entry,
                                std::span<const double> lm_scores,
                                double lambda) {
  if (entry.hyps.empty())
    Fail(ErrorKind::kEmptyInput, "rescore: n-best '" + entry.utt_id + "' is empty");
  if (lm_scores.size() != entry.hyps.size())
    Fail(ErrorKind::kContract, "rescore: " + std::to_string(lm_scores.size()) +
                                   " LM scores for " +
                                   std::to_string(entry.hyps.size()) +
                                   " hypotheses");
  RescoreResult r;
  std::vector<double> interp, am;
  for (std::size_t i = 0; i < entry.hyps.size(); ++i) {
    ScoredHypothesis h;
    h.words = metrics::NormalizedWords(entry.hyps[i].text);
    h.am_score = entry.hyps[i].am_score;
    h.lm_score = lm_scores[i];
    h.interp_score = Interpolate(h.lm_score, h.am_score, lambda);
    interp.push_back(h.interp_score);
    am.push_back(h.am_score);
    r.hyps.push_back(std::move(h));
  }
  std::vector<double> post = Posteriors(interp);
  for (std::size_t i = 0; i < post.size(); ++i) r.hyps[i].posterior = post[i];
  r.ranking = RankByScores(interp, am);
  r.selected = r.ranking.front();
  return r;
}

RescoreResult RescoreNBest(const Scorer &scorer, const NBestEntry &entry,
                           double lambda) {
  if (entry.hyps.empty())
    Fail(ErrorKind::kEmptyInput, "rescore: n-best '" + entry.utt_id + "' is empty");
  std::vector<std::string> texts;
  for (const auto &h : entry.hyps) texts.push_back(h.text);
  std::vector<double> lm = scorer.ScoreTexts(texts);
  RescoreResult r = RescoreWithScores(entry, lm, lambda);
  for (std::size_t i = 0; i < r.hyps.size(); ++i)
    r.hyps[i].tokens = scorer.model().vocab.Encode(r.hyps[i].words);
  return r;
}

std::vector<std::vector<double>> ScoreCorpus(const Scorer &scorer,
                                             const std::vector<NBestEntry> &entries,
                                             int threads) {
  std::vector<std::vector<double>> scores(entries.size());
  ParallelFor(entries.size(), threads, [&](std::size_t u) {
    std::vector<std::string> texts;
    for (const auto &h : entries[u].hyps) texts.push_back(h.text);
    scores[u] = scorer.ScoreTexts(texts);
  });
  return scores;
}

std::vector<std::size_t> SelectAll(const std::vector<NBestEntry> &entries,
                                   const std::vector<std::vector<double>> &lm_scores,
                                   double lambda) {
  if (lm_scores.size() != entries.size())
    Fail(ErrorKind::kContract, "select: score table does not match entries");
  std::vector<std::size_t> sel(entries.size());
  std::vector<double> interp, am;
  for (std::size_t u = 0; u < entries.size(); ++u) {
    const auto &hyps = entries[u].hyps;
    if (hyps.empty() || lm_scores[u].size() != hyps.size())
      Fail(ErrorKind::kContract, "select: bad n-best '" + entries[u].utt_id + "'");
    interp.resize(hyps.size());
    am.resize(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      am[i] = hyps[i].am_score;
      interp[i] = Interpolate(lm_scores[u][i], am[i], lambda);
    }
    sel[u] = RankByScores(interp, am).front();
  }
  return sel;
}

std::vector<NBestEntry> Annotate(const std::vector<NBestEntry> &entries,
                                 const std::vector<std::vector<double>> &lm_scores,
                                 double lambda) {
  std::vector<NBestEntry> out = entries;
  for (std::size_t u = 0; u < out.size(); ++u) {
    RescoreResult r = RescoreWithScores(entries[u], lm_scores[u], lambda);
    for (std::size_t i = 0; i < r.hyps.size(); ++i) {
      out[u].hyps[i].lm_score = r.hyps[i].lm_score;
      out[u].hyps[i].interp_score = r.hyps[i].interp_score;
    }
    for (std::size_t k = 0; k < r.ranking.size(); ++k)
      out[u].hyps[r.ranking[k]].rank = k;
    out[u].selected = r.selected;
  }
  return out;
}

metrics::WerReport SelectionWer(const std::vector<NBestEntry> &entries,
                                const std::vector<std::size_t> &selected) {
  if (selected.size() != entries.size())
    Fail(ErrorKind::kContract, "selection count does not match entries");
  std::vector<std::pair<metrics::Words, metrics::Words>> pairs;
  pairs.reserve(entries.size());
  for (std::size_t u = 0; u < entries.size(); ++u)
    pairs.emplace_back(metrics::NormalizedWords(entries[u].hyps.at(selected[u]).text),
                       metrics::NormalizedWords(entries[u].ref));
  return metrics::CorpusWer(pairs);
}

std::vector<std::size_t> FirstPassSelections(const std::vector<NBestEntry> &entries) {
  std::vector<std::vector<double>> zeros;
  zeros.reserve(entries.size());
  for (const auto &e : entries) zeros.emplace_back(e.hyps.size(), 0.0);
  return SelectAll(entries, zeros, 1.0);
}

metrics::WerReport OracleWer(const std::vector<NBestEntry> &entries) {
  std::vector<std::vector<metrics::Words>> hyps;
  std::vector<metrics::Words> refs;
  for (const auto &e : entries) {
    std::vector<metrics::Words> list;
    for (const auto &h : e.hyps) list.push_back(metrics::NormalizedWords(h.text));
    hyps.push_back(std::move(list));
    refs.push_back(metrics::NormalizedWords(e.ref));
  }
  return metrics::OracleWer(hyps, refs);
}

}  // namespace scoring
}  // namespace rescore
