// bench/bench.cc

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

#include "bench/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

#include "common/error.h"
#include "common/rng.h"

namespace rescore {
namespace bench {

Json ToJson(const BenchOptions &o) {
  return {{"n_hyps", o.n_hyps}, {"seq_len", o.seq_len}, {"warmup", o.warmup},
          {"iters", o.iters},   {"pll_iters", o.pll_iters}, {"seed", o.seed}};
}

BenchOptions BenchOptionsFromJson(const Json &j, BenchOptions o) {
  o.n_hyps = j.value("n_hyps", o.n_hyps);
  o.seq_len = j.value("seq_len", o.seq_len);
  o.warmup = j.value("warmup", o.warmup);
  o.iters = j.value("iters", o.iters);
  o.pll_iters = j.value("pll_iters", o.pll_iters);
  o.seed = j.value("seed", o.seed);
  if (o.n_hyps == 0 || o.seq_len == 0 || o.iters == 0)
    Fail(ErrorKind::kConfig, "bench needs n_hyps, seq_len and iters >= 1");
  return o;
}

Json ToJson(const BenchResult &r) {
  return {{"scorer_kind", r.scorer_kind},
          {"mean_latency_ms", r.mean_latency_ms},
          {"p50_latency_ms", r.p50_latency_ms},
          {"p95_latency_ms", r.p95_latency_ms},
          {"forward_pass_count", r.forward_pass_count},
          {"warmup_iters", r.warmup_iters},
          {"measured_iters", r.measured_iters},
          {"hardware", r.hardware},
          {"markers", r.markers}};
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) Fail(ErrorKind::kEmptyInput, "percentile of no values");
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * values.size()));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::string HardwareNote() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " hardware threads, measured on 1 thread, fp64";
}

BenchResult RunBench(const scoring::Scorer &scorer, const BenchOptions &o) {
  using Clock = std::chrono::steady_clock;
  BenchResult r;
  r.scorer_kind = scoring::ScorerKindName(scorer.kind());
  r.hardware = HardwareNote();

  const auto &vocab = scorer.model().vocab;
  if (vocab.words().empty()) Fail(ErrorKind::kConfig, "bench: model has no content words");
  Rng rng = MakeRng(o.seed, {0x62656e6368ULL});
  std::uniform_int_distribution<std::size_t> pick(0, vocab.words().size() - 1);
  std::vector<model::TokenSeq> hyps(o.n_hyps);
  for (auto &h : hyps) {
    std::vector<std::string> words(o.seq_len);
    for (auto &w : words) w = vocab.words()[pick(rng)];
    h = vocab.Encode(words);
  }
  r.markers.push_back("tokenize");

  r.warmup_iters = o.warmup;
  r.measured_iters = scorer.kind() == scoring::ScorerKind::kBidirectionalPll && o.pll_iters > 0
                         ? o.pll_iters
                         : o.iters;
  r.markers.push_back("warmup_begin");
  for (std::size_t i = 0; i < r.warmup_iters; ++i) scorer.ScoreTokens(hyps);
  r.markers.push_back("warmup_end");

  std::vector<double> ms;
  std::vector<std::uint64_t> counts;
  r.markers.push_back("measure_begin");
  for (std::size_t i = 0; i < r.measured_iters; ++i) {
    const std::uint64_t before = scorer.forward_count();
    const auto t0 = Clock::now();
    scorer.ScoreTokens(hyps);
    const auto t1 = Clock::now();
    counts.push_back(scorer.forward_count() - before);
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  r.markers.push_back("measure_end");

  if (std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) != counts.end())
    Fail(ErrorKind::kContract, "bench: forward-pass count varied between iterations");
  r.forward_pass_count = counts.front();
  r.mean_latency_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
  r.p50_latency_ms = Percentile(ms, 0.5);
  r.p95_latency_ms = Percentile(ms, 0.95);
  return r;
}

}  // namespace bench
}  // namespace rescore
