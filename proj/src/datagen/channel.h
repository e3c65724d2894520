// datagen/channel.h

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

#ifndef RESCORE_DATAGEN_CHANNEL_H_
#define RESCORE_DATAGEN_CHANNEL_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "common/json.h"
#include "common/rng.h"
#include "datagen/corpus.h"
#include "scoring/nbest.h"

namespace rescore {
namespace datagen {

struct ChannelConfig {
  double sub_rate = 0.1;
  double ins_rate = 0.01;
  double del_rate = 0.01;
  double confusion_temperature = 0.5;
  // Substitution candidates per word.
  std::size_t confusion_k = 2;
  std::size_t n_best = 10;
  double score_noise_sigma = 0.5;
  std::uint64_t seed = 1;

  void Validate() const;
};

Json ToJson(const ChannelConfig &c);
ChannelConfig ChannelConfigFromJson(const Json &j, ChannelConfig defaults = {});

// Character-level Levenshtein distance.
std::size_t CharEditDistance(const std::string &a, const std::string &b);

// For every lexicon word, its confusion_k nearest other words by character
// edit distance with weights softmax(-distance / temperature).
class ConfusionTable {
 public:
  ConfusionTable(const std::vector<std::string> &lexicon, std::size_t k,
                 double temperature);

  struct Candidate {
    std::size_t word;
    double weight;
  };
  const std::vector<Candidate> &Confusions(std::size_t word) const {
    return table_[word];
  }
  // Words that `word` can be a confusion of, each with the weight of that
  // confusion.
  const std::vector<Candidate> &Sources(std::size_t word) const {
    return sources_[word];
  }
  std::size_t Index(const std::string &word) const;
  const std::vector<std::string> &lexicon() const { return lexicon_; }

 private:
  std::vector<std::string> lexicon_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Candidate>> table_;
  std::vector<std::vector<Candidate>> sources_;
};

// Simulated first pass for one reference. The reference is corrupted into an
// observed word string; each observed word becomes a slot whose options are
// the word itself, the words it may be a confusion of and (when insertions
// are possible) the empty word, scored by the channel log-probability plus Gaussian noise. The
// N best distinct non-empty paths form the n-best, sorted by am_score. When
// fewer than N exist, single-word perturbations of the best path flagged as
// padding fill the list; if even those run out the entry is marked short.
scoring::NBestEntry CorruptToNBest(const Sentence &ref, const std::string &utt_id,
                                   const ChannelConfig &channel,
                                   const ConfusionTable &confusions, Rng &rng);

// One entry per sentence with ids "<split>-NNNNN". Each utterance draws from
// its own stream derived from (channel.seed, split, index), so the output is
// the same for any thread count.
std::vector<scoring::NBestEntry> GenerateNBest(
    const std::vector<Sentence> &sentences, const std::string &split,
    const ChannelConfig &channel, const ConfusionTable &confusions,
    int threads);

}  // namespace datagen
}  // namespace rescore

#endif  // RESCORE_DATAGEN_CHANNEL_H_
