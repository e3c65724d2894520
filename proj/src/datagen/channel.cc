// datagen/channel.cc

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

#include "datagen/channel.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "common/error.h"
#include "common/parallel.h"

namespace rescore {
namespace datagen {

namespace {

struct Option {
  std::optional<std::size_t> word;  // nullopt: empty word
  double score;
};

struct Path {
  double score = 0.0;
  std::vector<std::size_t> words;
};

std::string Text(const std::vector<std::size_t> &words,
                 const std::vector<std::string> &lexicon) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += lexicon[words[i]];
  }
  return s;
}

double SafeLog(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

std::uint64_t SplitTag(const std::string &split) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : split) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

void ChannelConfig::Validate() const {
  auto rate = [](double r, const char *name) {
    if (!(r >= 0.0 && r < 1.0))
      Fail(ErrorKind::kConfig, std::string(name) + " must be in [0, 1)");
  };
  rate(sub_rate, "sub_rate");
  rate(ins_rate, "ins_rate");
  rate(del_rate, "del_rate");
  if (!(sub_rate + del_rate < 1.0))
    Fail(ErrorKind::kConfig, "sub_rate + del_rate must be < 1");
  if (!(confusion_temperature > 0.0))
    Fail(ErrorKind::kConfig, "confusion_temperature must be > 0");
  if (confusion_k == 0) Fail(ErrorKind::kConfig, "confusion_k must be >= 1");
  if (n_best < 2) Fail(ErrorKind::kConfig, "n_best must be >= 2");
  if (!(score_noise_sigma >= 0.0))
    Fail(ErrorKind::kConfig, "score_noise_sigma must be >= 0");
}

Json ToJson(const ChannelConfig &c) {
  Json j;
  j["sub_rate"] = c.sub_rate;
  j["ins_rate"] = c.ins_rate;
  j["del_rate"] = c.del_rate;
  j["confusion_temperature"] = c.confusion_temperature;
  j["confusion_k"] = c.confusion_k;
  j["n_best"] = c.n_best;
  j["score_noise_sigma"] = c.score_noise_sigma;
  j["seed"] = c.seed;
  return j;
}

ChannelConfig ChannelConfigFromJson(const Json &j, ChannelConfig c) {
  c.sub_rate = j.value("sub_rate", c.sub_rate);
  c.ins_rate = j.value("ins_rate", c.ins_rate);
  c.del_rate = j.value("del_rate", c.del_rate);
  c.confusion_temperature = j.value("confusion_temperature", c.confusion_temperature);
  c.confusion_k = j.value("confusion_k", c.confusion_k);
  c.n_best = j.value("n_best", c.n_best);
  c.score_noise_sigma = j.value("score_noise_sigma", c.score_noise_sigma);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

std::size_t CharEditDistance(const std::string &a, const std::string &b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ConfusionTable::ConfusionTable(const std::vector<std::string> &lexicon,
                               std::size_t k, double temperature)
    : lexicon_(lexicon) {
  if (lexicon_.size() < 2)
    Fail(ErrorKind::kConfig, "confusion table needs at least two words");
  for (std::size_t i = 0; i < lexicon_.size(); ++i) index_[lexicon_[i]] = i;
  k = std::min(k, lexicon_.size() - 1);
  table_.resize(lexicon_.size());
  std::vector<std::pair<std::size_t, std::size_t>> dist;
  for (std::size_t a = 0; a < lexicon_.size(); ++a) {
    dist.clear();
    for (std::size_t b = 0; b < lexicon_.size(); ++b)
      if (b != a) dist.emplace_back(CharEditDistance(lexicon_[a], lexicon_[b]), b);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double w = std::exp(-static_cast<double>(dist[i].first) / temperature);
      table_[a].push_back({dist[i].second, w});
      total += w;
    }
    for (auto &c : table_[a]) c.weight /= total;
  }
  sources_.resize(lexicon_.size());
  for (std::size_t a = 0; a < lexicon_.size(); ++a)
    for (const auto &c : table_[a]) sources_[c.word].push_back({a, c.weight});
}

std::size_t ConfusionTable::Index(const std::string &word) const {
  auto it = index_.find(word);
  if (it == index_.end())
    Fail(ErrorKind::kVocab, "word '" + word + "' is not in the channel lexicon");
  return it->second;
}

scoring::NBestEntry CorruptToNBest(const Sentence &ref, const std::string &utt_id,
                                   const ChannelConfig &ch,
                                   const ConfusionTable &conf, Rng &rng) {
  if (ref.empty()) Fail(ErrorKind::kEmptyInput, "channel: empty reference");
  const auto &lexicon = conf.lexicon();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw_confusion = [&](std::size_t w) {
    double u = unit(rng);
    const auto &cands = conf.Confusions(w);
    for (const auto &c : cands) {
      if (u < c.weight) return c.word;
      u -= c.weight;
    }
    return cands.back().word;
  };

  // Observed word string.
  std::vector<std::size_t> observed;
  for (const std::string &word : ref) {
    const std::size_t w = conf.Index(word);
    const double u = unit(rng);
    if (u < ch.del_rate) {
    } else if (u < ch.del_rate + ch.sub_rate) {
      observed.push_back(draw_confusion(w));
    } else {
      observed.push_back(w);
    }
    if (unit(rng) < ch.ins_rate)
      observed.push_back(std::uniform_int_distribution<std::size_t>(
          0, lexicon.size() - 1)(rng));
  }
  if (observed.empty()) observed.push_back(conf.Index(ref.front()));

  // Slot options.
  const double keep_lp = SafeLog(1.0 - ch.sub_rate - ch.del_rate) + SafeLog(1.0 - ch.ins_rate);
  const double empty_lp = SafeLog(ch.ins_rate / static_cast<double>(lexicon.size()));
  std::vector<std::vector<Option>> slots;
  for (std::size_t o : observed) {
    std::vector<Option> opts;
    auto add = [&](std::optional<std::size_t> word, double lp) {
      if (!std::isfinite(lp)) return;
      opts.push_back({word, lp + ch.score_noise_sigma * noise(rng)});
    };
    add(o, keep_lp);
    for (const auto &c : conf.Sources(o))
      add(c.word, SafeLog(ch.sub_rate * c.weight) + SafeLog(1.0 - ch.ins_rate));
    add(std::nullopt, empty_lp);
    slots.push_back(std::move(opts));
  }

  // Beam of 2N partial paths; exact for the 2N best complete paths.
  const std::size_t keep = 2 * ch.n_best;
  std::vector<Path> paths(1);
  for (const auto &opts : slots) {
    std::vector<Path> next;
    next.reserve(paths.size() * opts.size());
    for (const Path &p : paths)
      for (const Option &o : opts) {
        Path q = p;
        q.score += o.score;
        if (o.word) q.words.push_back(*o.word);
        next.push_back(std::move(q));
      }
    std::stable_sort(next.begin(), next.end(),
                     [](const Path &a, const Path &b) { return a.score > b.score; });
    if (next.size() > keep) next.resize(keep);
    paths = std::move(next);
  }

  scoring::NBestEntry entry;
  entry.utt_id = utt_id;
  entry.ref = JoinSentence(ref);
  std::unordered_set<std::string> seen;
  for (const Path &p : paths) {
    if (entry.hyps.size() == ch.n_best) break;
    if (p.words.empty()) continue;
    std::string text = Text(p.words, lexicon);
    if (!seen.insert(text).second) continue;
    entry.hyps.push_back({text, p.score, false, {}, {}, {}});
  }

  if (entry.hyps.size() < ch.n_best) {
    // Forced single-word perturbations of the best path.
    const Path &best = *std::find_if(paths.begin(), paths.end(),
                                     [](const Path &p) { return !p.words.empty(); });
    const double floor = entry.hyps.back().am_score - 10.0;
    std::size_t k = 0;
    auto offer = [&](const std::vector<std::size_t> &words) {
      if (entry.hyps.size() == ch.n_best || words.empty()) return;
      std::string text = Text(words, lexicon);
      if (!seen.insert(text).second) return;
      entry.hyps.push_back({text, floor - 0.5 * static_cast<double>(k++), true, {}, {}, {}});
    };
    for (std::size_t t = 0; t < best.words.size(); ++t)
      for (const auto &c : conf.Confusions(best.words[t])) {
        std::vector<std::size_t> w = best.words;
        w[t] = c.word;
        offer(w);
      }
    for (std::size_t t = 0; t < best.words.size(); ++t) {
      std::vector<std::size_t> w = best.words;
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(t));
      offer(w);
    }
    entry.short_list = entry.hyps.size() < ch.n_best;
  }
  return entry;
}

std::vector<scoring::NBestEntry> GenerateNBest(
    const std::vector<Sentence> &sentences, const std::string &split,
    const ChannelConfig &channel, const ConfusionTable &confusions,
    int threads) {
  channel.Validate();
  std::vector<scoring::NBestEntry> out(sentences.size());
  const std::uint64_t tag = SplitTag(split);
  ParallelFor(sentences.size(), threads, [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof(id), "-%05zu", i);
    Rng rng = MakeRng(channel.seed, {tag, i});
    out[i] = CorruptToNBest(sentences[i], split + id, channel, confusions, rng);
  });
  return out;
}

}  // namespace datagen
}  // namespace rescore
