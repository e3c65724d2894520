// common/parallel.h

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

#ifndef RESCORE_COMMON_PARALLEL_H_
#define RESCORE_COMMON_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace rescore {

// Runs body(i) for i in [0, n) on up to `threads` workers. Work is split in
// contiguous chunks; callers write results into per-index slots so the
// outcome never depends on scheduling. The first exception is rethrown.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)> &body);

}  // namespace rescore

#endif  // RESCORE_COMMON_PARALLEL_H_
