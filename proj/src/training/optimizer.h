// training/optimizer.h

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

#ifndef RESCORE_TRAINING_OPTIMIZER_H_
#define RESCORE_TRAINING_OPTIMIZER_H_

#include <map>
#include <string>
#include <vector>

#include "diffcore/tensor.h"
#include "model/params.h"

namespace rescore {
namespace training {

// Adam with bias correction. Moments are kept per parameter name.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from `grads` (same names and sizes as params).
  void Step(model::ModelParams &params,
            const std::map<std::string, std::vector<double>> &grads, double lr);

  std::size_t steps() const { return t_; }

  // Checkpoint extras: optim.m.<name>, optim.v.<name>, optim.t.
  std::map<std::string, diff::Tensor> State() const;
  void LoadState(const std::map<std::string, diff::Tensor> &extras);

 private:
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace training
}  // namespace rescore

#endif  // RESCORE_TRAINING_OPTIMIZER_H_
