// diffcore/tape.cc

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

#include "diffcore/tape.h"

#include <algorithm>

#include "common/error.h"

namespace rescore {
namespace diff {

namespace {
thread_local Tape *g_active_tape = nullptr;
}  // namespace

Tape *Tape::Active() { return g_active_tape; }

Tape::Scope::Scope(Tape &tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

Tape::Scope::~Scope() { g_active_tape = previous_; }

void Tape::Record(std::string op, std::vector<Tensor> inputs,
                  const Tensor &output, BackwardFn backward) {
  Entry entry;
  entry.op = std::move(op);
  entry.inputs.reserve(inputs.size());
  for (const Tensor &t : inputs) {
    if (!t.is_leaf() && !produced_.count(t.id()))
      Fail(ErrorKind::kContract, "tape: input of '" + entry.op +
                                     "' was produced outside this tape");
    entry.inputs.push_back(t.node());
  }
  entry.output = output.node();
  entry.backward = std::move(backward);
  produced_.insert(output.id());
  entries_.push_back(std::move(entry));
}

void Tape::Backward(const Tensor &loss) {
  if (!loss.defined() || loss.size() != 1)
    Fail(ErrorKind::kContract,
         "backward: loss must be a scalar, got " +
             (loss.defined() ? ShapeString(loss.shape()) : "undefined"));
  for (Entry &e : entries_) e.output->grad.assign(e.output->value.size(), 0.0);
  TensorNode &seed = *loss.node();
  seed.EnsureGrad();
  seed.grad[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const Entry &e = *it;
    bool any_nonzero = std::any_of(e.output->grad.begin(), e.output->grad.end(),
                                   [](double g) { return g != 0.0; });
    if (!any_nonzero) continue;
    e.backward(*e.output, e.inputs);
  }
}

void Tape::Clear() {
  entries_.clear();
  produced_.clear();
}

}  // namespace diff
}  // namespace rescore
