// training/tuning.h

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

#ifndef RESCORE_TRAINING_TUNING_H_
#define RESCORE_TRAINING_TUNING_H_

#include <vector>

#include "common/json.h"
#include "scoring/nbest.h"
#include "scoring/scorer.h"

namespace rescore {
namespace training {

struct LambdaPoint {
  double lambda = 0.0;
  double wer = 0.0;
};

struct LambdaTuning {
  double best_lambda = 0.0;
  double best_wer = 0.0;
  std::vector<LambdaPoint> curve;  // grid order
};

// {0, 0.1, ..., 2.0}
std::vector<double> DefaultLambdaGrid();

// Dev WER at every grid point from LM scores computed once. Ties go to the
// smallest lambda.
LambdaTuning TuneLambda(const std::vector<scoring::NBestEntry> &dev,
                        const std::vector<std::vector<double>> &lm_scores,
                        const std::vector<double> &grid);

LambdaTuning TuneLambda(const scoring::Scorer &scorer,
                        const std::vector<scoring::NBestEntry> &dev,
                        const std::vector<double> &grid, int threads);

Json ToJson(const LambdaTuning &t);

}  // namespace training
}  // namespace rescore

#endif  // RESCORE_TRAINING_TUNING_H_
