// diffcore/tensor.cc

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

#include "diffcore/tensor.h"

#include <atomic>

#include "common/error.h"

namespace rescore {
namespace diff {

std::uint64_t NextTensorId() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::size_t NumElements(const Shape &shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::FromValues(Shape shape, std::vector<double> values,
                          bool requires_grad) {
  if (shape.size() > 2)
    Fail(ErrorKind::kDimension,
         "tensor rank above 2 is not supported: " + ShapeString(shape));
  if (NumElements(shape) != values.size())
    Fail(ErrorKind::kDimension,
         "shape " + ShapeString(shape) + " does not hold " +
             std::to_string(values.size()) + " values");
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->id = NextTensorId();
  return Tensor(std::move(node));
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  std::size_t n = NumElements(shape);
  return FromValues(std::move(shape), std::vector<double>(n, 0.0),
                    requires_grad);
}

Tensor Tensor::Full(Shape shape, double v, bool requires_grad) {
  std::size_t n = NumElements(shape);
  return FromValues(std::move(shape), std::vector<double>(n, v),
                    requires_grad);
}

Tensor Tensor::Scalar(double v, bool requires_grad) {
  return FromValues({}, {v}, requires_grad);
}

Tensor Tensor::Vector(std::vector<double> values, bool requires_grad) {
  std::size_t n = values.size();
  return FromValues({n}, std::move(values), requires_grad);
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values, bool requires_grad) {
  return FromValues({rows, cols}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  return rank() == 2 ? node_->shape[0] : 1;
}

std::size_t Tensor::cols() const {
  if (rank() == 0) return 1;
  return rank() == 1 ? node_->shape[0] : node_->shape[1];
}

double Tensor::item() const {
  if (size() != 1)
    Fail(ErrorKind::kContract,
         "item() on non-scalar tensor " + ShapeString(shape()));
  return node_->value[0];
}

Tensor Tensor::Clone() const {
  return FromValues(node_->shape, node_->value, node_->requires_grad);
}

}  // namespace diff
}  // namespace rescore
