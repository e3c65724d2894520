// diffcore/ops.h

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

#ifndef RESCORE_DIFFCORE_OPS_H_
#define RESCORE_DIFFCORE_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "diffcore/tensor.h"

namespace rescore {
namespace diff {

// The operator set. Everything the models need is composed from these.
//
// Arithmetic: MatMul, Add, Mul, EmbeddingLookup, LayerNorm, Gelu, Softmax,
// Log, Sum, Mean.
// Layout only (no arithmetic in either direction): Transpose, ConcatRows.
//
// Add and Mul broadcast over the 2-D view of their operands: each dimension
// must match or be 1 (a rank-1 [n] operand is a 1xn row).

// [m x k] . [k x n] -> [m x n]. Each output element is accumulated over k in
// increasing order, so a row's result does not depend on the other rows.
Tensor MatMul(const Tensor &a, const Tensor &b);
Tensor Add(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);
// Gathers rows of `table` [V x d] -> [ids.size() x d]; backward scatters.
Tensor EmbeddingLookup(const Tensor &table, std::span<const std::size_t> ids);
// Row-wise normalization over the last axis with learned gain and bias [d].
Tensor LayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                 double eps = 1e-5);
// Exact (erf) GELU.
Tensor Gelu(const Tensor &x);
// Max-subtracted softmax along `axis` (-1 is the last axis).
Tensor Softmax(const Tensor &x, int axis = -1);
Tensor Log(const Tensor &x);
// Sum of all elements (scalar), accumulated in index order from 0.0.
Tensor Sum(const Tensor &x);
// Sum along one axis of a rank-2 tensor, keeping the reduced dimension.
Tensor Sum(const Tensor &x, int axis);
Tensor Mean(const Tensor &x);
Tensor Mean(const Tensor &x, int axis);

Tensor Transpose(const Tensor &a);
// Inputs of rank 0 or 1 count as one row.
Tensor ConcatRows(std::span<const Tensor> parts);

// Compositions.
inline Tensor Scale(const Tensor &a, double c) {
  return Mul(a, Tensor::Scalar(c));
}
inline Tensor Sub(const Tensor &a, const Tensor &b) {
  return Add(a, Scale(b, -1.0));
}
inline Tensor Dot(const Tensor &a, const Tensor &b) { return Sum(Mul(a, b)); }

}  // namespace diff
}  // namespace rescore

#endif  // RESCORE_DIFFCORE_OPS_H_
