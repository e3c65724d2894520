// training/tuning.cc

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

#include "training/tuning.h"

#include "common/error.h"
#include "scoring/rescore.h"

namespace rescore {
namespace training {

std::vector<double> DefaultLambdaGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 10.0);
  return grid;
}

LambdaTuning TuneLambda(const std::vector<scoring::NBestEntry> &dev,
                        const std::vector<std::vector<double>> &lm_scores,
                        const std::vector<double> &grid) {
  if (grid.empty()) Fail(ErrorKind::kConfig, "lambda grid is empty");
  for (double l : grid)
    if (!(l >= 0.0)) Fail(ErrorKind::kConfig, "lambda grid values must be >= 0");
  LambdaTuning t;
  bool first = true;
  for (double lambda : grid) {
    double wer = scoring::SelectionWer(dev, scoring::SelectAll(dev, lm_scores, lambda)).wer;
    t.curve.push_back({lambda, wer});
    if (first || wer < t.best_wer || (wer == t.best_wer && lambda < t.best_lambda)) {
      t.best_lambda = lambda;
      t.best_wer = wer;
      first = false;
    }
  }
  return t;
}

LambdaTuning TuneLambda(const scoring::Scorer &scorer,
                        const std::vector<scoring::NBestEntry> &dev,
                        const std::vector<double> &grid, int threads) {
  return TuneLambda(dev, scoring::ScoreCorpus(scorer, dev, threads), grid);
}

Json ToJson(const LambdaTuning &t) {
  Json curve = Json::array();
  for (const auto &p : t.curve) curve.push_back({{"lambda", p.lambda}, {"wer", p.wer}});
  return {{"best_lambda", t.best_lambda}, {"best_wer", t.best_wer}, {"curve", curve}};
}

}  // namespace training
}  // namespace rescore
