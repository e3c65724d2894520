// diffcore/grad_check.h

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

#ifndef RESCORE_DIFFCORE_GRAD_CHECK_H_
#define RESCORE_DIFFCORE_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "diffcore/tensor.h"

namespace rescore {
namespace diff {

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t coordinates = 0;
  // Location of the worst coordinate, "leaf#index".
  std::string worst;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// |a - b| / max(|a|, |b|, 1e-8)
double RelativeError(double a, double b);

// Compares reverse-mode gradients of the scalar f() with respect to `leaves`
// against central differences of width `step`. Leaves are perturbed in place
// and restored. When max_coords_per_leaf > 0 an evenly spaced subset of each
// leaf's coordinates is checked.
GradCheckReport GradCheck(const std::function<Tensor()> &f,
                          std::vector<Tensor> leaves, double step, double tol,
                          std::size_t max_coords_per_leaf = 0);

// Single-input form: f is applied to a leaf holding a copy of x.
GradCheckReport GradCheck(const std::function<Tensor(const Tensor &)> &f,
                          const Tensor &x, double step, double tol);

}  // namespace diff
}  // namespace rescore

#endif  // RESCORE_DIFFCORE_GRAD_CHECK_H_
