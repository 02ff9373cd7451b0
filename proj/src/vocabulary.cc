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

#include "cbs/vocabulary.h"

#include "cbs/errors.h"

namespace cbs {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string_view eos) {
  tokens_.reserve(tokens.size() + 1);
  for (auto& t : tokens) Add(std::move(t));
  auto found = Find(eos);
  eos_ = found ? *found : Add(std::string(eos));
}

Vocabulary Vocabulary::FromSentences(
    std::span<const std::vector<std::string>> sentences, std::string_view eos) {
  Vocabulary vocab({std::string(eos)}, eos);
  for (const auto& sentence : sentences) {
    for (const auto& w : sentence) {
      if (!vocab.Contains(w)) vocab.Add(w);
    }
  }
  return vocab;
}

bool Vocabulary::Contains(std::string_view word) const {
  return index_.find(word) != index_.end();
}

std::optional<TokenId> Vocabulary::Find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::Id(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) {
    throw ConstraintError("unknown token: \"" + std::string(word) + "\"");
  }
  return it->second;
}

const std::string& Vocabulary::Word(TokenId id) const {
  if (!Valid(id)) {
    throw ContractViolation("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::Add(std::string word) {
  if (Contains(word)) {
    throw DataError("duplicate vocabulary word: \"" + word + "\"");
  }
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(word, id);
  tokens_.push_back(std::move(word));
  return id;
}

std::vector<TokenId> Vocabulary::Encode(std::span<const std::string> words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(Id(w));
  return ids;
}

std::string Vocabulary::Decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(Word(ids[i]));
  }
  return out;
}

}  // namespace cbs
