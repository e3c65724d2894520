// tests/unit/test_metrics.cc

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

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "helpers.h"
#include "metrics/report.h"
#include "metrics/text.h"
#include "metrics/wer.h"

using namespace rescore;
using namespace rescore::metrics;

namespace {

Words W(const std::string &s) { return NormalizedWords(s); }

// Plain recursion over suffixes, memoized on (i, j).
std::size_t MemoDistance(const Words &a, const Words &b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    return memo[key] = best;
  };
  return go(0, 0);
}

Words RandomWords(std::mt19937_64 &rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len), tok(0, 4);
  Words w(len(rng));
  for (auto &x : w) x = std::string(1, static_cast<char>('a' + tok(rng)));
  return w;
}

}  // namespace

TEST_CASE("edit distance examples") {
  auto same = EditDistance(W("a b c"), W("a b c"));
  CHECK(same.distance == 0);
  auto del = EditDistance({}, W("a b c d e"));
  CHECK(del.distance == 5);
  CHECK(del.deletions == 5);
  auto sub = EditDistance(W("a x c"), W("a b c"));
  CHECK(sub.distance == 1);
  CHECK(sub.substitutions == 1);
  auto ins = EditDistance(W("a b c d"), W("a b c"));
  CHECK(ins.insertions == 1);
  CHECK(ins.distance == 1);
}

TEST_CASE("edit distance matches a memoized recursion") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    Words a = RandomWords(rng, 12), b = RandomWords(rng, 12);
    auto r = EditDistance(a, b);
    CHECK(r.distance == MemoDistance(a, b));
    CHECK(r.distance == r.substitutions + r.insertions + r.deletions);
    CHECK(r.insertions + b.size() == r.deletions + a.size());
  }
}

TEST_CASE("edit distance properties") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Words a = RandomWords(rng, 8), b = RandomWords(rng, 8), c = RandomWords(rng, 8);
    const auto ab = EditDistance(a, b).distance, ba = EditDistance(b, a).distance;
    CHECK(ab == ba);
    CHECK(ab <= EditDistance(a, c).distance + EditDistance(c, b).distance);
    CHECK(ab <= std::max(a.size(), b.size()));
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("corpus wer is micro-averaged") {
  std::vector<std::pair<Words, Words>> sel = {{W("a b c x"), W("a b c d")},
                                              {W("a b c d e f"), W("a b c d e f")}};
  auto r = CorpusWer(sel);
  CHECK(r.wer == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(r.reference_word_count == 10);
  CHECK(r.per_utterance.size() == 2);
  std::vector<std::pair<Words, Words>> perfect = {{W("a"), W("a")}};
  CHECK(CorpusWer(perfect).wer == 0.0);
  std::vector<std::pair<Words, Words>> empty_ref = {{W("a"), {}}};
  CHECK_ERROR_KIND(CorpusWer(empty_ref), ErrorKind::kEmptyInput);
}

TEST_CASE("corpus wer agrees with a second implementation on 50 utterances") {
  std::mt19937_64 rng(77);
  std::vector<std::pair<Words, Words>> sel;
  for (int i = 0; i < 50; ++i) {
    Words ref = RandomWords(rng, 10);
    if (ref.empty()) ref = {"a"};
    sel.push_back({RandomWords(rng, 10), ref});
  }
  // Row-by-row dynamic program, independent of the library's alignment.
  std::size_t errors = 0, words = 0;
  for (const auto &[h, r] : sel) {
    std::vector<std::size_t> prev(r.size() + 1), cur(r.size() + 1);
    for (std::size_t j = 0; j <= r.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= h.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= r.size(); ++j)
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h[i - 1] != r[j - 1])});
      std::swap(prev, cur);
    }
    errors += prev[r.size()];
    words += r.size();
  }
  auto rep = CorpusWer(sel);
  CHECK(rep.substitutions + rep.insertions + rep.deletions == errors);
  CHECK(rep.wer == static_cast<double>(errors) / words);
}

TEST_CASE("oracle wer") {
  std::mt19937_64 rng(9);
  std::vector<std::vector<Words>> hyps;
  std::vector<Words> refs;
  for (int u = 0; u < 40; ++u) {
    Words ref = RandomWords(rng, 8);
    if (ref.empty()) ref = {"b"};
    std::vector<Words> list;
    for (int i = 0; i < 6; ++i) list.push_back(RandomWords(rng, 8));
    hyps.push_back(list);
    refs.push_back(ref);
  }
  std::size_t brute = 0, words = 0;
  std::vector<std::pair<Words, Words>> first;
  for (std::size_t u = 0; u < hyps.size(); ++u) {
    std::size_t best = SIZE_MAX, idx = 0;
    for (std::size_t i = 0; i < hyps[u].size(); ++i) {
      const std::size_t d = MemoDistance(hyps[u][i], refs[u]);
      if (d < best) best = d, idx = i;
    }
    CHECK(OracleIndex(hyps[u], refs[u]) == idx);
    brute += best;
    words += refs[u].size();
    first.push_back({hyps[u][0], refs[u]});
  }
  auto oracle = OracleWer(hyps, refs);
  CHECK(oracle.wer == static_cast<double>(brute) / words);
  CHECK(oracle.wer <= CorpusWer(first).wer);

  std::vector<std::vector<Words>> with_ref = {{W("x"), W("a b")}, {W("c")}};
  CHECK(OracleWer(with_ref, {W("a b"), W("c")}).wer == 0.0);
  CHECK(OracleIndex({W("a"), W("a")}, W("b")) == 0);
}

TEST_CASE("relative werr") {
  CHECK(std::abs(RelativeWerr(5.67, 4.77) - 15.87) < 5e-3);
  CHECK(std::abs(RelativeWerr(5.67, 4.52) - 20.28) < 5e-3);
  CHECK(std::abs(RelativeWerr(5.67, 4.52) - 20.34) <= 0.1);
  CHECK(RelativeWerr(3.0, 3.0) == 0.0);
  CHECK_ERROR_KIND(RelativeWerr(0.0, 1.0), ErrorKind::kContract);
}

TEST_CASE("text normalization") {
  CHECK(NormalizeText("  Hello,   World!  ") == "hello world");
  CHECK(NormalizeText("A.B\tc\n") == "ab c");
  CHECK(NormalizeText("") == "");
  CHECK(NormalizedWords("It's  OK").size() == 2);
  CHECK(JoinWords({"a", "b"}) == "a b");
  CHECK(EditDistance(W("The cat."), W("the CAT")).distance == 0);
}

TEST_CASE("result table") {
  ResultTable t("test WER (%)");
  t.Add({"first_pass", "-", std::nullopt, 5.67, std::nullopt});
  t.Add({"causal_ll", "ce", 49.0, 4.77, std::nullopt});
  t.SetBaseline(5.67);
  CHECK(*t.rows()[0].relative_werr == 0.0);
  CHECK(std::abs(*t.rows()[1].relative_werr - 15.873) < 1e-3);
  const std::string text = t.Format();
  CHECK(text.find("4.77") != std::string::npos);
  CHECK(text.find("(15.87)") != std::string::npos);
  ResultTable back = ResultTable::FromJson(t.ToJson());
  CHECK(back.ToJson() == t.ToJson());
  CHECK(back.rows()[0].latency_ms == std::nullopt);
}
