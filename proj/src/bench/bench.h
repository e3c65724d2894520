// bench/bench.h

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

#ifndef RESCORE_BENCH_BENCH_H_
#define RESCORE_BENCH_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "common/json.h"
#include "scoring/scorer.h"

namespace rescore {
namespace bench {

struct BenchOptions {
  std::size_t n_hyps = 10;
  std::size_t seq_len = 64;
  std::size_t warmup = 1;
  std::size_t iters = 5;
  // Iteration count for bidirectional_pll, which is far slower; 0 uses iters.
  std::size_t pll_iters = 3;
  std::uint64_t seed = 1;
};

Json ToJson(const BenchOptions &o);
BenchOptions BenchOptionsFromJson(const Json &j, BenchOptions defaults = {});

struct BenchResult {
  std::string scorer_kind;
  double mean_latency_ms = 0.0;
  double p50_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  // Model evaluations for rescoring one n-best.
  std::uint64_t forward_pass_count = 0;
  std::size_t warmup_iters = 0;
  std::size_t measured_iters = 0;
  std::string hardware;
  // Phase markers in the order they happened: "tokenize", then
  // "warmup_begin"/"warmup_end", then "measure_begin"/"measure_end".
  std::vector<std::string> markers;
};

Json ToJson(const BenchResult &r);

// Rescoring latency of one synthetic n-best (n_hyps hypotheses of seq_len
// content tokens) with the scorer's model. Hypotheses are drawn and
// tokenized before timing starts; the timed region is one call scoring the
// whole n-best.
BenchResult RunBench(const scoring::Scorer &scorer, const BenchOptions &options);

// Nearest-rank percentile of `values` (q in [0, 1]).
double Percentile(std::vector<double> values, double q);

std::string HardwareNote();

}  // namespace bench
}  // namespace rescore

#endif  // RESCORE_BENCH_BENCH_H_
