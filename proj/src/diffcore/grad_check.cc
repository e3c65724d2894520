// diffcore/grad_check.cc

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

#include "diffcore/grad_check.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"
#include "diffcore/tape.h"

namespace rescore {
namespace diff {

double RelativeError(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

GradCheckReport GradCheck(const std::function<Tensor()> &f,
                          std::vector<Tensor> leaves, double step, double tol,
                          std::size_t max_coords_per_leaf) {
  for (Tensor &leaf : leaves) {
    if (!leaf.is_leaf() || !leaf.requires_grad())
      Fail(ErrorKind::kContract,
           "grad_check: every checked tensor must be a requires_grad leaf");
    leaf.ZeroGrad();
  }
  {
    Tape tape;
    Tape::Scope scope(tape);
    Tensor loss = f();
    tape.Backward(loss);
  }

  GradCheckReport report;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor &leaf = leaves[li];
    const std::size_t n = leaf.size();
    std::vector<std::size_t> coords;
    if (max_coords_per_leaf == 0 || n <= max_coords_per_leaf) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (std::size_t k = 0; k < max_coords_per_leaf; ++k)
        coords.push_back(k * n / max_coords_per_leaf);
    }
    auto values = leaf.mutable_values();
    for (std::size_t i : coords) {
      const double original = values[i];
      values[i] = original + step;
      const double up = f().item();
      values[i] = original - step;
      const double down = f().item();
      values[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = leaf.grad()[i];
      const double err = RelativeError(analytic, numeric);
      ++report.coordinates;
      if (err > report.max_rel_err || report.worst.empty()) {
        report.max_rel_err = std::max(report.max_rel_err, err);
        if (err >= report.max_rel_err) {
          report.worst = std::to_string(li) + "#" + std::to_string(i);
          report.worst_analytic = analytic;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

GradCheckReport GradCheck(const std::function<Tensor(const Tensor &)> &f,
                          const Tensor &x, double step, double tol) {
  Tensor leaf = Tensor::FromValues(x.shape(),
                                   std::vector<double>(x.values().begin(),
                                                       x.values().end()),
                                   true);
  return GradCheck([&] { return f(leaf); }, {leaf}, step, tol);
}

}  // namespace diff
}  // namespace rescore
