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

#include "cbs/constraints.h"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"
#include "cbs/text.h"

namespace cbs {

using nlohmann::json;

namespace {

std::vector<std::vector<std::string>> ReadWordLists(const json& in,
                                                    const char* key) {
  std::vector<std::vector<std::string>> out;
  if (!in.contains(key)) return out;
  for (const auto& group : in.at(key)) {
    std::vector<std::string> words;
    for (const auto& w : group) words.push_back(ToLower(w.get<std::string>()));
    out.push_back(std::move(words));
  }
  return out;
}

std::string Quote(const std::vector<std::string>& words) {
  return "[" + Join(words, ", ") + "]";
}

}  // namespace

ConstraintSpec ParseConstraintSpec(std::string_view json_text) {
  try {
    const json in = json::parse(json_text);
    if (!in.is_object()) throw ParseError("constraint spec must be an object");
    ConstraintSpec spec;
    spec.disjunctions = ReadWordLists(in, "disjunctions");
    spec.phrases = ReadWordLists(in, "phrases");
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("constraint spec: ") + e.what());
  }
}

ConstraintSpec LoadConstraintSpec(const std::string& path) {
  return ParseConstraintSpec(ReadFile(path));
}

std::string ConstraintSpecToJson(const ConstraintSpec& spec) {
  return json{{"disjunctions", spec.disjunctions}, {"phrases", spec.phrases}}
      .dump();
}

LemmaMap LemmaMap::Parse(std::string_view text) {
  LemmaMap map;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> group;
    std::size_t field = 0;
    while (field <= line.size()) {
      std::size_t tab = line.find('\t', field);
      if (tab == std::string_view::npos) tab = line.size();
      auto word = ToLower(line.substr(field, tab - field));
      if (!word.empty()) group.push_back(std::move(word));
      field = tab + 1;
    }
    if (!group.empty()) map.AddGroup(group);
    pos = end + 1;
  }
  return map;
}

LemmaMap LemmaMap::Load(const std::string& path) {
  return Parse(ReadFile(path));
}

std::string LemmaMap::Root(const std::string& word) const {
  std::string cur = word;
  for (;;) {
    auto it = parent_.find(cur);
    if (it->second == cur) return cur;
    auto up = parent_.find(it->second);
    it->second = up->second;  // path halving
    cur = it->second;
  }
}

void LemmaMap::AddGroup(const std::vector<std::string>& words) {
  for (const auto& w : words) parent_.try_emplace(w, w);
  for (std::size_t k = 1; k < words.size(); ++k) {
    const std::string a = Root(words[0]);
    const std::string b = Root(words[k]);
    if (a == b) continue;
    // Smaller string becomes the root so the result is order-independent.
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }
}

std::set<std::string> LemmaMap::Forms(std::string_view word) const {
  const std::string key = ToLower(word);
  std::set<std::string> out{key};
  if (parent_.find(key) == parent_.end()) return out;
  const std::string root = Root(key);
  for (const auto& [w, unused] : parent_) {
    if (Root(w) == root) out.insert(w);
  }
  return out;
}

std::vector<TokenId> ExpandLemmas(std::string_view word, const LemmaMap& lemmas,
                                  const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& form : lemmas.Forms(word)) {
    if (auto id = vocab.Find(form)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

DisjunctiveConstraints ResolveDisjunctions(const ConstraintSpec& spec,
                                           const Vocabulary& vocab,
                                           const LemmaMap* lemmas) {
  DisjunctiveConstraints out;
  static const LemmaMap kNoLemmas;
  const LemmaMap& map = lemmas ? *lemmas : kNoLemmas;
  for (const auto& words : spec.disjunctions) {
    std::vector<TokenId> ids;
    for (const auto& w : words) {
      auto expanded = ExpandLemmas(w, map, vocab);
      ids.insert(ids.end(), expanded.begin(), expanded.end());
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) {
      throw ConstraintError("unsatisfiable disjunction, no word in vocabulary: " +
                            Quote(words));
    }
    out.disjunctions.push_back(std::move(ids));
  }
  return out;
}

PhraseConstraint ResolvePhrase(const std::vector<std::string>& words,
                               const Vocabulary& vocab) {
  if (words.empty()) throw ConstraintError("phrase constraint is empty");
  PhraseConstraint phrase;
  for (const auto& w : words) {
    auto id = vocab.Find(w);
    if (!id) {
      throw ConstraintError("unknown token \"" + w + "\" in phrase " +
                            Quote(words));
    }
    phrase.tokens.push_back(*id);
  }
  return phrase;
}

std::vector<std::string> UnknownWords(const ConstraintSpec& spec,
                                      const Vocabulary& vocab,
                                      const LemmaMap* lemmas) {
  std::set<std::string> unknown;
  static const LemmaMap kNoLemmas;
  const LemmaMap& map = lemmas ? *lemmas : kNoLemmas;
  for (const auto& words : spec.disjunctions) {
    for (const auto& w : words) {
      if (ExpandLemmas(w, map, vocab).empty()) unknown.insert(w);
    }
  }
  for (const auto& words : spec.phrases) {
    for (const auto& w : words) {
      if (!vocab.Contains(w)) unknown.insert(w);
    }
  }
  return {unknown.begin(), unknown.end()};
}

Fsm CompileConstraintSpec(const ConstraintSpec& spec, const Vocabulary& vocab,
                          const LemmaMap* lemmas) {
  if (spec.empty()) return Fsm::AcceptAll(vocab.size());
  Fsm fsm = CompileDisjunctions(ResolveDisjunctions(spec, vocab, lemmas),
                                vocab.size());
  for (const auto& words : spec.phrases) {
    fsm = Intersect(fsm, CompilePhrase(ResolvePhrase(words, vocab), vocab.size()));
  }
  return fsm;
}

std::vector<Fsm> CompilePhraseAlternatives(const ConstraintSpec& spec,
                                           const Vocabulary& vocab,
                                           const LemmaMap* lemmas) {
  const Fsm base = CompileDisjunctions(ResolveDisjunctions(spec, vocab, lemmas),
                                       vocab.size());
  std::vector<Fsm> out;
  if (spec.phrases.empty()) {
    out.push_back(base);
    return out;
  }
  for (const auto& words : spec.phrases) {
    out.push_back(
        Intersect(base, CompilePhrase(ResolvePhrase(words, vocab), vocab.size())));
  }
  return out;
}

}  // namespace cbs
