// model/vocabulary.h

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

#ifndef RESCORE_MODEL_VOCABULARY_H_
#define RESCORE_MODEL_VOCABULARY_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "model/config.h"

namespace rescore {
namespace model {

// Word-level tokenizer derived from a corpus. Ids [0, special::kCount) are
// the reserved specials; content words follow in the order given.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  // Sorted unique words of the given sentences.
  static Vocabulary FromSentences(
      const std::vector<std::vector<std::string>> &sentences);

  std::size_t size() const { return special::kCount + words_.size(); }
  const std::vector<std::string> &words() const { return words_; }

  bool Contains(std::string_view word) const;
  // special::kUnk for out-of-vocabulary words.
  TokenId Id(std::string_view word) const;
  const std::string &Word(TokenId id) const;

  TokenSeq Encode(const std::vector<std::string> &words) const;
  // Normalizes and splits `text` first.
  TokenSeq EncodeText(std::string_view text) const;
  std::vector<std::string> Decode(const TokenSeq &ids) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace model
}  // namespace rescore

#endif  // RESCORE_MODEL_VOCABULARY_H_
