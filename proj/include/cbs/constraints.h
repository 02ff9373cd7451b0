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

#ifndef CBS_CONSTRAINTS_H_
#define CBS_CONSTRAINTS_H_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/fsm.h"
#include "cbs/vocabulary.h"

namespace cbs {

// Word-level constraint spec as read from the JSON constraint file:
//   {"disjunctions": [["chair","chairs"],["desk","table"]],
//    "phrases": [["billiard","table"]]}
// Both keys are optional.
struct ConstraintSpec {
  std::vector<std::vector<std::string>> disjunctions;
  std::vector<std::vector<std::string>> phrases;

  bool empty() const { return disjunctions.empty() && phrases.empty(); }
  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) =
      default;
};

ConstraintSpec ParseConstraintSpec(std::string_view json_text);
ConstraintSpec LoadConstraintSpec(const std::string& path);
std::string ConstraintSpecToJson(const ConstraintSpec& spec);

// Groups of surface forms that share a lemma. Overlapping groups merge, so
// the relation is an equivalence after closure. Words are lower-cased.
class LemmaMap {
 public:
  LemmaMap() = default;

  // One group per line, members separated by tabs. Blank lines are skipped.
  static LemmaMap Parse(std::string_view text);
  static LemmaMap Load(const std::string& path);

  void AddGroup(const std::vector<std::string>& words);

  // All forms sharing `word`'s lemma, including `word` itself.
  std::set<std::string> Forms(std::string_view word) const;

  std::size_t size() const { return parent_.size(); }

 private:
  std::string Root(const std::string& word) const;

  // Union-find over words. Roots map to themselves.
  mutable std::map<std::string, std::string, std::less<>> parent_;
};

// Vocabulary ids of `word` and its lemma-mates. Sorted; empty when neither
// the word nor any mate is in the vocabulary.
std::vector<TokenId> ExpandLemmas(std::string_view word, const LemmaMap& lemmas,
                                  const Vocabulary& vocab);

// Resolves every disjunction to token ids, expanding each listed word
// through `lemmas` when given. A disjunction that resolves to nothing raises
// ConstraintError naming its words.
DisjunctiveConstraints ResolveDisjunctions(const ConstraintSpec& spec,
                                           const Vocabulary& vocab,
                                           const LemmaMap* lemmas = nullptr);

// Phrases resolve word by word, without lemma expansion. Unknown words raise
// ConstraintError.
PhraseConstraint ResolvePhrase(const std::vector<std::string>& words,
                               const Vocabulary& vocab);

// Words in `spec` that are missing from `vocab` (and, with `lemmas`, have no
// in-vocabulary lemma-mate for disjunctions). Sorted, unique.
std::vector<std::string> UnknownWords(const ConstraintSpec& spec,
                                      const Vocabulary& vocab,
                                      const LemmaMap* lemmas = nullptr);

// The disjunction machine intersected with one machine per phrase, so every
// phrase is required. An empty spec compiles to Fsm::AcceptAll.
Fsm CompileConstraintSpec(const ConstraintSpec& spec, const Vocabulary& vocab,
                          const LemmaMap* lemmas = nullptr);

// One machine per phrase, each intersected with the disjunction machine.
// Used when the phrases are alternatives (a synset) rather than all
// required.
std::vector<Fsm> CompilePhraseAlternatives(const ConstraintSpec& spec,
                                           const Vocabulary& vocab,
                                           const LemmaMap* lemmas = nullptr);

}  // namespace cbs

#endif  // CBS_CONSTRAINTS_H_
