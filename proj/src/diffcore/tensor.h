// diffcore/tensor.h

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

#ifndef RESCORE_DIFFCORE_TENSOR_H_
#define RESCORE_DIFFCORE_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rescore {
namespace diff {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape &shape);
std::string ShapeString(const Shape &shape);

// Storage shared by every Tensor handle that refers to the same value.
// `grad` stays empty until something accumulates into it.
struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::uint64_t id = 0;

  void EnsureGrad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Dense row-major tensor of rank 0, 1 or 2, double precision. Copying a
// Tensor copies the handle; use Clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double v, bool requires_grad = false);
  static Tensor FromValues(Shape shape, std::vector<double> values,
                           bool requires_grad = false);
  static Tensor Scalar(double v, bool requires_grad = false);
  static Tensor Vector(std::vector<double> values, bool requires_grad = false);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  // 2-D view: rank 0 is 1x1, rank 1 [n] is 1xn.
  std::size_t rows() const;
  std::size_t cols() const;

  std::uint64_t id() const { return node_->id; }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }
  bool is_leaf() const { return node_->is_leaf; }

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  double at(std::size_t i) const { return node_->value[i]; }
  double at(std::size_t r, std::size_t c) const {
    return node_->value[r * cols() + c];
  }
  double item() const;

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() {
    node_->EnsureGrad();
    return node_->grad;
  }
  void ZeroGrad() { node_->grad.assign(node_->value.size(), 0.0); }

  // Fresh leaf with the same values and requires_grad flag, no grad.
  Tensor Clone() const;

  const std::shared_ptr<TensorNode> &node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

std::uint64_t NextTensorId();

}  // namespace diff
}  // namespace rescore

#endif  // RESCORE_DIFFCORE_TENSOR_H_
