// Copyright 2026 The cbsdecode Authors. All Rights Reserved.
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
// =============================================================================

#ifndef CBS_VOCABULARY_H_
#define CBS_VOCABULARY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbs {

using TokenId = std::int32_t;

inline constexpr std::string_view kDefaultEos = "<eos>";

// Dense, 0-based mapping between surface strings and token ids. Always holds
// an end-of-sequence token.
class Vocabulary {
 public:
  // Builds from `tokens` in order. `eos` is appended if absent. Duplicate
  // surface strings raise DataError.
  explicit Vocabulary(std::vector<std::string> tokens,
                      std::string_view eos = kDefaultEos);

  // Collects tokens in first-seen order; the end marker comes first.
  static Vocabulary FromSentences(
      std::span<const std::vector<std::string>> sentences,
      std::string_view eos = kDefaultEos);

  std::size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  const std::string& eos_string() const { return tokens_[eos_]; }

  bool Contains(std::string_view word) const;
  std::optional<TokenId> Find(std::string_view word) const;
  // Throws ConstraintError for unknown words.
  TokenId Id(std::string_view word) const;
  // Throws ContractViolation for ids out of range.
  const std::string& Word(TokenId id) const;
  bool Valid(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  // Appends `word` at id size(); DataError if it already exists.
  TokenId Add(std::string word);

  std::vector<TokenId> Encode(std::span<const std::string> words) const;
  std::string Decode(std::span<const TokenId> ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.eos_ == b.eos_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
  TokenId eos_ = 0;
};

}  // namespace cbs

#endif  // CBS_VOCABULARY_H_
