// diffcore/tape.h

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

#ifndef RESCORE_DIFFCORE_TAPE_H_
#define RESCORE_DIFFCORE_TAPE_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "diffcore/tensor.h"

namespace rescore {
namespace diff {

// Records differentiable operations in execution order. Operators record onto
// the tape that is active on the calling thread (see Tape::Scope); with no
// active tape nothing is recorded and outputs never require grad.
//
// A tape and the tensors on it belong to one thread. Independent tapes may
// run on different threads as long as they do not share leaves whose grads
// are accumulated.
class Tape {
 public:
  using Inputs = std::span<const std::shared_ptr<TensorNode>>;
  // Reads out.grad and accumulates into the grads of inputs that require it.
  using BackwardFn = std::function<void(const TensorNode &out, Inputs inputs)>;

  struct Entry {
    std::string op;
    std::vector<std::shared_ptr<TensorNode>> inputs;
    std::shared_ptr<TensorNode> output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  void Record(std::string op, std::vector<Tensor> inputs, const Tensor &output,
              BackwardFn backward);

  // Populates grad on every requires_grad tensor reachable from `loss`.
  // Intermediate grads are reset first; leaf grads accumulate (+=) across
  // calls until ZeroGrad.
  void Backward(const Tensor &loss);

  const std::vector<Entry> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  void Clear();

  static Tape *Active();

  class Scope {
   public:
    explicit Scope(Tape &tape);
    ~Scope();
    Scope(const Scope &) = delete;
    Scope &operator=(const Scope &) = delete;

   private:
    Tape *previous_;
  };

 private:
  std::vector<Entry> entries_;
  std::unordered_set<std::uint64_t> produced_;
};

inline bool IsRecording() { return Tape::Active() != nullptr; }

inline void Backward(const Tensor &loss, Tape &tape) { tape.Backward(loss); }

}  // namespace diff
}  // namespace rescore

#endif  // RESCORE_DIFFCORE_TAPE_H_
