// tests/unit/test_datagen.cc

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

#include <map>
#include <set>

#include "datagen/channel.h"
#include "datagen/corpus.h"
#include "doctest.h"
#include "helpers.h"
#include "metrics/text.h"
#include "metrics/wer.h"

using namespace rescore;
using namespace rescore::datagen;

namespace {

CorpusSpec SmallSpec(std::uint64_t seed) {
  CorpusSpec s;
  s.vocab_size = 60;
  s.train_count = 300;
  s.dev_count = 50;
  s.test_count = 50;
  s.adapt_count = 200;
  s.seed = seed;
  return s;
}

struct Rates {
  double first_pass = 0.0, oracle = 0.0;
};

Rates Measure(const std::vector<scoring::NBestEntry> &entries) {
  std::vector<std::pair<metrics::Words, metrics::Words>> first;
  std::vector<std::vector<metrics::Words>> hyps;
  std::vector<metrics::Words> refs;
  for (const auto &e : entries) {
    auto ref = metrics::NormalizedWords(e.ref);
    first.push_back({metrics::NormalizedWords(e.hyps[0].text), ref});
    std::vector<metrics::Words> list;
    for (const auto &h : e.hyps) list.push_back(metrics::NormalizedWords(h.text));
    hyps.push_back(list);
    refs.push_back(ref);
  }
  return {metrics::CorpusWer(first).wer, metrics::OracleWer(hyps, refs).wer};
}

}  // namespace

TEST_CASE("corpus generation is deterministic") {
  Corpus a = GenerateCorpus(SmallSpec(7)), b = GenerateCorpus(SmallSpec(7));
  CHECK(a.lexicon == b.lexicon);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.adapt == b.adapt);
  Corpus c = GenerateCorpus(SmallSpec(8));
  CHECK(c.train != a.train);
}

TEST_CASE("lengths stay in range and splits are disjoint") {
  for (auto source : {CorpusSource::kMarkovBigram, CorpusSource::kTemplateGrammar}) {
    CorpusSpec s = SmallSpec(3);
    s.source = source;
    s.min_len = 4;
    s.max_len = 12;
    s.train_count = 1000;
    Corpus c = GenerateCorpus(s);
    std::set<std::string> lex(c.lexicon.begin(), c.lexicon.end());
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto *split : {&c.train, &c.dev, &c.test, &c.adapt}) {
      for (const auto &sent : *split) {
        CHECK(sent.size() >= 4);
        CHECK(sent.size() <= 12);
        for (const auto &w : sent) CHECK(lex.count(w) == 1);
        seen.insert(JoinSentence(sent));
        ++total;
      }
    }
    CHECK(seen.size() == total);
    CHECK(c.train.size() == 1000);
  }
}

TEST_CASE("bigram source frequencies match its transition matrix") {
  Rng rng = MakeRng(11);
  std::vector<std::string> lexicon = MakeLexicon(40, rng);
  BigramSource source(lexicon, 5, 1.1, rng);
  std::map<std::pair<std::size_t, std::size_t>, double> counts;
  std::map<std::size_t, double> outgoing;
  std::size_t tokens = 0;
  while (tokens < 100000) {
    Sentence s = source.Sample(3, 10, rng);
    tokens += s.size();
    for (std::size_t i = 1; i < s.size(); ++i) {
      const std::size_t a = source.Index(s[i - 1]), b = source.Index(s[i]);
      counts[{a, b}] += 1;
      outgoing[a] += 1;
    }
  }
  std::size_t checked = 0;
  for (const auto &[a, n] : outgoing) {
    if (n < 1000) continue;
    double mass = 0.0;
    for (std::size_t b : source.Successors(a)) {
      const double p = source.Transition(a, b);
      mass += p;
      CHECK(std::abs(counts[{a, b}] / n - p) <= 0.05);
      ++checked;
    }
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
  CHECK(checked > 20);
  for (const auto &[ab, n] : counts) CHECK(source.Transition(ab.first, ab.second) > 0.0);
}

TEST_CASE("zero-rate channel pads after the reference") {
  Corpus c = GenerateCorpus(SmallSpec(2));
  ChannelConfig ch;
  ch.sub_rate = ch.ins_rate = ch.del_rate = 0.0;
  ch.score_noise_sigma = 0.0;
  ConfusionTable table(c.lexicon, ch.confusion_k, ch.confusion_temperature);
  Rng rng = MakeRng(1);
  auto e = CorruptToNBest(c.train[0], "train-00000", ch, table, rng);
  REQUIRE(e.hyps.size() == ch.n_best);
  CHECK(e.hyps[0].text == JoinSentence(c.train[0]));
  CHECK_FALSE(e.hyps[0].padding);
  std::set<std::string> texts;
  for (std::size_t i = 0; i < e.hyps.size(); ++i) {
    texts.insert(e.hyps[i].text);
    if (i > 0) {
      CHECK(e.hyps[i].padding);
      CHECK(e.hyps[i].am_score <= e.hyps[i - 1].am_score);
    }
  }
  CHECK(texts.size() == e.hyps.size());
}

TEST_CASE("channel calibration on ten thousand words") {
  CorpusSpec s = SmallSpec(4);
  s.vocab_size = 300;
  s.train_count = 1600;
  Corpus c = GenerateCorpus(s);
  std::size_t words = 0;
  std::vector<Sentence> refs;
  for (const auto &sent : c.train) {
    if (words >= 10000) break;
    refs.push_back(sent);
    words += sent.size();
  }
  REQUIRE(words >= 10000);
  ChannelConfig ch;
  ch.sub_rate = 0.1;
  ConfusionTable table(c.lexicon, ch.confusion_k, ch.confusion_temperature);
  Rates r = Measure(GenerateNBest(refs, "train", ch, table, 1));
  CHECK(r.first_pass >= 0.05);
  CHECK(r.first_pass <= 0.20);
}

TEST_CASE("oracle is strictly better than the first pass") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CorpusSpec s = SmallSpec(seed);
    s.train_count = 100;
    Corpus c = GenerateCorpus(s);
    ChannelConfig ch;
    ch.seed = seed;
    ConfusionTable table(c.lexicon, ch.confusion_k, ch.confusion_temperature);
    auto entries = GenerateNBest(c.train, "train", ch, table, 1);
    for (const auto &e : entries) {
      CHECK((e.hyps.size() == ch.n_best || e.short_list));
      CHECK(e.hyps.size() >= 2);
      for (std::size_t i = 1; i < e.hyps.size(); ++i)
        CHECK(e.hyps[i].am_score <= e.hyps[i - 1].am_score);
    }
    Rates r = Measure(entries);
    CHECK(r.oracle < r.first_pass);
    CHECK(r.oracle > 0.0);
  }
}

TEST_CASE("parallel generation equals serial generation") {
  Corpus c = GenerateCorpus(SmallSpec(5));
  ChannelConfig ch;
  ConfusionTable table(c.lexicon, ch.confusion_k, ch.confusion_temperature);
  auto serial = GenerateNBest(c.train, "train", ch, table, 1);
  auto parallel = GenerateNBest(c.train, "train", ch, table, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(scoring::FormatNBestLine(serial[i]) == scoring::FormatNBestLine(parallel[i]));
  CHECK(serial[3].utt_id == "train-00003");
}

TEST_CASE("confusions") {
  CHECK(CharEditDistance("kitten", "sitting") == 3);
  CHECK(CharEditDistance("", "abc") == 3);
  std::vector<std::string> lex = {"ba", "be", "bo", "zuzu"};
  ConfusionTable t(lex, 2, 0.5);
  const auto &c = t.Confusions(t.Index("ba"));
  REQUIRE(c.size() == 2);
  double sum = 0;
  for (const auto &x : c) {
    CHECK(x.word != t.Index("ba"));
    CHECK(x.word != t.Index("zuzu"));
    sum += x.weight;
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("generator config validation") {
  ChannelConfig ch;
  ch.sub_rate = 0.6;
  ch.del_rate = 0.5;
  CHECK_ERROR_KIND(ch.Validate(), ErrorKind::kConfig);
  ch = ChannelConfig();
  ch.n_best = 1;
  CHECK_ERROR_KIND(ch.Validate(), ErrorKind::kConfig);
  ch = ChannelConfig();
  ch.confusion_temperature = 0.0;
  CHECK_ERROR_KIND(ch.Validate(), ErrorKind::kConfig);
  CorpusSpec s;
  s.min_len = 5;
  s.max_len = 4;
  CHECK_ERROR_KIND(s.Validate(), ErrorKind::kConfig);
  CHECK_ERROR_KIND(ChannelConfigFromJson(Json{{"sub_rate", 1.5}}), ErrorKind::kConfig);
}
