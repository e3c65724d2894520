// datagen/corpus.cc

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

#include "datagen/corpus.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_set>

#include "common/error.h"

namespace rescore {
namespace datagen {

namespace {

const char kConsonants[] = "bdfgklmnprstvz";
const char kVowels[] = "aeiou";

std::vector<double> ZipfWeights(std::size_t n, double s) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += w[r] = std::pow(r + 1.0, -s);
  for (double &v : w) v /= total;
  return w;
}

std::size_t Draw(const std::vector<double> &p, Rng &rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (u < p[i]) return i;
    u -= p[i];
  }
  return p.size() - 1;
}

std::size_t UniformIndex(std::size_t n, Rng &rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

const char *CorpusSourceName(CorpusSource s) {
  return s == CorpusSource::kMarkovBigram ? "markov_bigram" : "template_grammar";
}

CorpusSource ParseCorpusSource(const std::string &s) {
  if (s == "markov_bigram") return CorpusSource::kMarkovBigram;
  if (s == "template_grammar") return CorpusSource::kTemplateGrammar;
  Fail(ErrorKind::kConfig, "unknown corpus source '" + s + "'");
}

void CorpusSpec::Validate() const {
  if (vocab_size < 20) Fail(ErrorKind::kConfig, "corpus vocab_size must be >= 20");
  if (min_len == 0 || min_len > max_len)
    Fail(ErrorKind::kConfig, "corpus length range must satisfy 1 <= min_len <= max_len");
  if (train_count == 0 || dev_count == 0 || test_count == 0)
    Fail(ErrorKind::kConfig, "train, dev and test splits must be non-empty");
  if (successors == 0 || successors > vocab_size)
    Fail(ErrorKind::kConfig, "successors must be in [1, vocab_size]");
  if (!(zipf_exponent >= 0.0)) Fail(ErrorKind::kConfig, "zipf_exponent must be >= 0");
}

Json ToJson(const CorpusSpec &s) {
  Json j;
  j["source"] = CorpusSourceName(s.source);
  j["vocab_size"] = s.vocab_size;
  j["train_count"] = s.train_count;
  j["dev_count"] = s.dev_count;
  j["test_count"] = s.test_count;
  j["adapt_count"] = s.adapt_count;
  j["min_len"] = s.min_len;
  j["max_len"] = s.max_len;
  j["successors"] = s.successors;
  j["zipf_exponent"] = s.zipf_exponent;
  j["seed"] = s.seed;
  return j;
}

CorpusSpec CorpusSpecFromJson(const Json &j, CorpusSpec s) {
  if (j.contains("source")) s.source = ParseCorpusSource(j["source"].get<std::string>());
  s.vocab_size = j.value("vocab_size", s.vocab_size);
  s.train_count = j.value("train_count", s.train_count);
  s.dev_count = j.value("dev_count", s.dev_count);
  s.test_count = j.value("test_count", s.test_count);
  s.adapt_count = j.value("adapt_count", s.adapt_count);
  s.min_len = j.value("min_len", s.min_len);
  s.max_len = j.value("max_len", s.max_len);
  s.successors = j.value("successors", s.successors);
  s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
  s.seed = j.value("seed", s.seed);
  s.Validate();
  return s;
}

std::vector<std::string> MakeLexicon(std::size_t count, Rng &rng) {
  const std::size_t nc = sizeof(kConsonants) - 1, nv = sizeof(kVowels) - 1;
  std::vector<std::string> syllables;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t v = 0; v < nv; ++v)
      syllables.push_back(std::string{kConsonants[c], kVowels[v]});
  std::unordered_set<std::string> seen;
  std::vector<std::string> words;
  std::size_t attempts = 0;
  while (words.size() < count) {
    if (++attempts > 1000 * count)
      Fail(ErrorKind::kConfig, "cannot build a lexicon of " + std::to_string(count) + " words");
    std::size_t n = 1 + UniformIndex(3, rng);
    std::string w;
    for (std::size_t i = 0; i < n; ++i) w += syllables[UniformIndex(syllables.size(), rng)];
    if (UniformIndex(3, rng) == 0) w += kConsonants[UniformIndex(nc, rng)];
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

BigramSource::BigramSource(std::vector<std::string> lexicon,
                           std::size_t successors, double zipf_exponent,
                           Rng &rng)
    : lexicon_(std::move(lexicon)) {
  const std::size_t v = lexicon_.size();
  if (v == 0 || successors == 0 || successors > v)
    Fail(ErrorKind::kConfig, "bigram source: bad lexicon/successor sizes");
  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> zipf_v = ZipfWeights(v, zipf_exponent);
  start_.assign(v, 0.0);
  for (std::size_t r = 0; r < v; ++r) start_[order[r]] = zipf_v[r];

  std::vector<double> zipf_k = ZipfWeights(successors, zipf_exponent);
  next_.resize(v);
  next_p_.resize(v);
  for (std::size_t a = 0; a < v; ++a) {
    std::shuffle(order.begin(), order.end(), rng);
    next_[a].assign(order.begin(), order.begin() + successors);
    next_p_[a] = zipf_k;
  }
}

Sentence BigramSource::Sample(std::size_t min_len, std::size_t max_len,
                              Rng &rng) const {
  std::size_t len = std::uniform_int_distribution<std::size_t>(min_len, max_len)(rng);
  Sentence s;
  std::size_t w = Draw(start_, rng);
  s.push_back(lexicon_[w]);
  while (s.size() < len) {
    w = next_[w][Draw(next_p_[w], rng)];
    s.push_back(lexicon_[w]);
  }
  return s;
}

double BigramSource::Transition(std::size_t a, std::size_t b) const {
  for (std::size_t k = 0; k < next_[a].size(); ++k)
    if (next_[a][k] == b) return next_p_[a][k];
  return 0.0;
}

std::size_t BigramSource::Index(const std::string &word) const {
  auto it = std::find(lexicon_.begin(), lexicon_.end(), word);
  if (it == lexicon_.end()) Fail(ErrorKind::kVocab, "word '" + word + "' not in lexicon");
  return static_cast<std::size_t>(it - lexicon_.begin());
}

TemplateSource::TemplateSource(std::vector<std::string> lexicon, Rng &rng)
    : lexicon_(std::move(lexicon)) {
  // det adj noun verb adv prep
  const std::vector<double> share = {0.04, 0.16, 0.36, 0.24, 0.12, 0.08};
  std::vector<std::size_t> order(lexicon_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  classes_.resize(share.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < share.size(); ++c) {
    std::size_t n = c + 1 == share.size()
                        ? order.size() - pos
                        : std::max<std::size_t>(1, static_cast<std::size_t>(share[c] * order.size()));
    for (std::size_t i = 0; i < n && pos < order.size(); ++i) classes_[c].push_back(order[pos++]);
  }
  templates_ = {
      {0, 2, 3},
      {0, 2, 3, 4},
      {0, 1, 2, 3},
      {0, 2, 3, 0, 2},
      {0, 1, 2, 3, 0, 2},
      {0, 2, 3, 5, 0, 2},
      {0, 1, 2, 3, 4, 5, 0, 2},
      {0, 2, 5, 0, 1, 2, 3, 4},
      {0, 1, 2, 3, 0, 1, 2, 5, 0, 2},
      {2, 3, 4},
      {2, 3, 0, 1, 2},
  };
}

Sentence TemplateSource::Sample(std::size_t min_len, std::size_t max_len,
                                Rng &rng) const {
  std::vector<std::size_t> ok;
  for (std::size_t t = 0; t < templates_.size(); ++t)
    if (templates_[t].size() >= min_len && templates_[t].size() <= max_len) ok.push_back(t);
  if (ok.empty())
    Fail(ErrorKind::kConfig, "template source: no template fits the length range");
  const auto &tpl = templates_[ok[UniformIndex(ok.size(), rng)]];
  Sentence s;
  for (std::size_t c : tpl) {
    const auto &cls = classes_[c];
    s.push_back(lexicon_[cls[UniformIndex(cls.size(), rng)]]);
  }
  return s;
}

Corpus GenerateCorpus(const CorpusSpec &spec) {
  spec.Validate();
  Rng lex_rng = MakeRng(spec.seed, {1});
  Rng src_rng = MakeRng(spec.seed, {2});
  Rng rng = MakeRng(spec.seed, {3});
  Corpus corpus;
  corpus.lexicon = MakeLexicon(spec.vocab_size, lex_rng);

  std::function<Sentence()> sample;
  std::unique_ptr<BigramSource> bigram;
  std::unique_ptr<TemplateSource> grammar;
  if (spec.source == CorpusSource::kMarkovBigram) {
    bigram = std::make_unique<BigramSource>(corpus.lexicon, spec.successors,
                                            spec.zipf_exponent, src_rng);
    sample = [&] { return bigram->Sample(spec.min_len, spec.max_len, rng); };
  } else {
    grammar = std::make_unique<TemplateSource>(corpus.lexicon, src_rng);
    sample = [&] { return grammar->Sample(spec.min_len, spec.max_len, rng); };
  }

  const std::size_t total = spec.sentence_count();
  std::unordered_set<std::string> seen;
  std::vector<Sentence> all;
  all.reserve(total);
  std::size_t attempts = 0;
  while (all.size() < total) {
    if (++attempts > 50 * total + 1000)
      Fail(ErrorKind::kConfig, "corpus source cannot produce " +
                                   std::to_string(total) + " distinct sentences");
    Sentence s = sample();
    if (seen.insert(JoinSentence(s)).second) all.push_back(std::move(s));
  }
  auto take = [&](std::size_t begin, std::size_t n) {
    return std::vector<Sentence>(all.begin() + begin, all.begin() + begin + n);
  };
  std::size_t pos = 0;
  corpus.train = take(pos, spec.train_count), pos += spec.train_count;
  corpus.dev = take(pos, spec.dev_count), pos += spec.dev_count;
  corpus.test = take(pos, spec.test_count), pos += spec.test_count;
  corpus.adapt = take(pos, spec.adapt_count);
  return corpus;
}

std::string JoinSentence(const Sentence &s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += s[i];
  }
  return out;
}

}  // namespace datagen
}  // namespace rescore
