// datagen/corpus.h

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

#ifndef RESCORE_DATAGEN_CORPUS_H_
#define RESCORE_DATAGEN_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "common/json.h"
#include "common/rng.h"

namespace rescore {
namespace datagen {

using Sentence = std::vector<std::string>;

enum class CorpusSource { kMarkovBigram, kTemplateGrammar };

const char *CorpusSourceName(CorpusSource s);
CorpusSource ParseCorpusSource(const std::string &s);

struct CorpusSpec {
  CorpusSource source = CorpusSource::kMarkovBigram;
  std::size_t vocab_size = 300;  // content words
  std::size_t train_count = 5000;
  std::size_t dev_count = 500;
  std::size_t test_count = 500;
  // Text-only sentences for domain adaptation, disjoint from the splits.
  std::size_t adapt_count = 20000;
  std::size_t min_len = 3;
  std::size_t max_len = 10;
  // Out-degree of every word in the bigram source.
  std::size_t successors = 6;
  double zipf_exponent = 1.1;
  std::uint64_t seed = 1;

  std::size_t sentence_count() const {
    return train_count + dev_count + test_count + adapt_count;
  }
  void Validate() const;
};

Json ToJson(const CorpusSpec &s);
CorpusSpec CorpusSpecFromJson(const Json &j, CorpusSpec defaults = {});

// `count` distinct pronounceable words built from consonant-vowel syllables.
std::vector<std::string> MakeLexicon(std::size_t count, Rng &rng);

// First-order Markov source over a lexicon. Every word has a fixed sparse
// successor set with Zipf-shaped weights; the start word is Zipf over a
// random ranking. Sentence length is uniform in [min_len, max_len].
class BigramSource {
 public:
  BigramSource(std::vector<std::string> lexicon, std::size_t successors,
               double zipf_exponent, Rng &rng);

  Sentence Sample(std::size_t min_len, std::size_t max_len, Rng &rng) const;

  const std::vector<std::string> &lexicon() const { return lexicon_; }
  // Transition probability P(b | a) by lexicon index.
  double Transition(std::size_t a, std::size_t b) const;
  const std::vector<std::size_t> &Successors(std::size_t a) const {
    return next_[a];
  }
  std::size_t Index(const std::string &word) const;

 private:
  std::vector<std::string> lexicon_;
  std::vector<double> start_;
  std::vector<std::vector<std::size_t>> next_;
  std::vector<std::vector<double>> next_p_;
};

// Fixed sentence templates over word classes carved out of the lexicon.
class TemplateSource {
 public:
  TemplateSource(std::vector<std::string> lexicon, Rng &rng);
  Sentence Sample(std::size_t min_len, std::size_t max_len, Rng &rng) const;
  const std::vector<std::string> &lexicon() const { return lexicon_; }

 private:
  std::vector<std::string> lexicon_;
  std::vector<std::vector<std::size_t>> classes_;
  std::vector<std::vector<std::size_t>> templates_;
};

struct Corpus {
  std::vector<std::string> lexicon;
  std::vector<Sentence> train, dev, test, adapt;
};

// Deterministic in spec.seed. All sentences across splits are distinct.
Corpus GenerateCorpus(const CorpusSpec &spec);

std::string JoinSentence(const Sentence &s);

}  // namespace datagen
}  // namespace rescore

#endif  // RESCORE_DATAGEN_CORPUS_H_
