// model/vocabulary.cc

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

#include "model/vocabulary.h"

#include <algorithm>
#include <array>
#include <set>

#include "common/error.h"
#include "metrics/text.h"

namespace rescore {
namespace model {

namespace {
const std::array<std::string, special::kCount> kSpecialNames = {
    "<pad>", "<s>", "</s>", "<cls>", "<mask>", "<unk>"};
}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (auto &w : words) {
    if (w.empty() || index_.count(w)) continue;
    if (std::find(kSpecialNames.begin(), kSpecialNames.end(), w) !=
        kSpecialNames.end())
      Fail(ErrorKind::kConfig, "vocabulary word collides with special '" + w +
                                   "'");
    index_.emplace(w, special::kCount + words_.size());
    words_.push_back(std::move(w));
  }
}

Vocabulary Vocabulary::FromSentences(
    const std::vector<std::vector<std::string>> &sentences) {
  std::set<std::string> unique;
  for (const auto &s : sentences) unique.insert(s.begin(), s.end());
  return Vocabulary(std::vector<std::string>(unique.begin(), unique.end()));
}

bool Vocabulary::Contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

TokenId Vocabulary::Id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? special::kUnk : it->second;
}

const std::string &Vocabulary::Word(TokenId id) const {
  if (id < special::kCount) return kSpecialNames[id];
  if (id >= size())
    Fail(ErrorKind::kVocab, "token id " + std::to_string(id) +
                                " outside vocabulary of size " +
                                std::to_string(size()));
  return words_[id - special::kCount];
}

TokenSeq Vocabulary::Encode(const std::vector<std::string> &words) const {
  TokenSeq ids;
  ids.reserve(words.size());
  for (const auto &w : words) ids.push_back(Id(w));
  return ids;
}

TokenSeq Vocabulary::EncodeText(std::string_view text) const {
  return Encode(metrics::NormalizedWords(text));
}

std::vector<std::string> Vocabulary::Decode(const TokenSeq &ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (TokenId id : ids) words.push_back(Word(id));
  return words;
}

}  // namespace model
}  // namespace rescore
