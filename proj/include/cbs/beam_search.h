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

#ifndef CBS_BEAM_SEARCH_H_
#define CBS_BEAM_SEARCH_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbs/fsm.h"
#include "cbs/scorer.h"
#include "cbs/vocabulary.h"

namespace cbs {

struct SearchParams {
  std::size_t beam_size = 5;
  // Maximum number of tokens in an output, end marker included.
  std::size_t max_len = 20;
  // Forbid emitting the same token twice in a row.
  bool no_repeat = true;
  // Rank by logprob / length instead of the raw sum. Disables early
  // termination since normalized scores are not monotone.
  bool length_normalize = false;
};

struct Hypothesis {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  StateId fsm_state = 0;
  bool completed = false;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

// Total order used everywhere a decoder ranks hypotheses: higher logprob,
// then shorter, then completed before live, then lexicographically smaller
// token ids.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b);

enum class DecodeStatus { kAccepted, kFallback, kEmpty };

const char* StatusName(DecodeStatus status);

struct DecodeResult {
  // Best completed hypothesis in an accepting state, or the fallback.
  std::optional<Hypothesis> best;
  // Best completed hypothesis of each state that completed one.
  std::map<StateId, Hypothesis> per_state_best;
  // Constraints satisfied by `best` (Fsm::progress of its state).
  int satisfied_count = 0;
  DecodeStatus status = DecodeStatus::kEmpty;
  // Number of expansion steps performed.
  std::size_t steps = 0;
};

// One beam per FSM state. Every live hypothesis is extended by every token
// (minus the no-repeat exclusion; at the last step only the end marker). An
// extension lands in the beam of the state δ(state, token) and each beam
// keeps its best `beam_size`. Completed hypotheses stay in their beam but
// are never extended. The search stops once an accepting beam holds a
// completed hypothesis that beats every live hypothesis in every beam, or
// after max_len steps.
//
// When no accepting hypothesis completes, the result falls back to the best
// completed hypothesis of the state with the most satisfied constraints.
//
// Throws ContractViolation on empty vocabulary, beam_size 0, max_len 0, or
// when the scorer, FSM and vocabulary sizes disagree.
DecodeResult ConstrainedBeamSearch(const Scorer& scorer, const Fsm& fsm,
                                   const Vocabulary& vocab,
                                   const SearchParams& params,
                                   std::span<const double> conditioning = {});

// Unconstrained search: ConstrainedBeamSearch over Fsm::AcceptAll. Empty
// when nothing completes within max_len.
std::optional<Hypothesis> BeamSearch(const Scorer& scorer,
                                     const Vocabulary& vocab,
                                     const SearchParams& params,
                                     std::span<const double> conditioning = {});

struct MultiPhraseResult {
  DecodeResult result;
  // Index into the run list of the run `result` came from.
  std::optional<std::size_t> selected;
  std::vector<DecodeResult> runs;
};

// Runs one constrained search per machine and keeps the accepted result
// with the highest logprob. Without any accepted run, keeps the fallback
// with the most satisfied constraints (ties: higher logprob). Throws
// ContractViolation when `fsms` is empty.
MultiPhraseResult DecodeMultiPhrase(const Scorer& scorer,
                                    std::span<const Fsm> fsms,
                                    const Vocabulary& vocab,
                                    const SearchParams& params,
                                    std::span<const double> conditioning = {});

MultiPhraseResult DecodeMultiPhrase(
    const Scorer& scorer, std::span<const PhraseConstraint> phrases,
    const Vocabulary& vocab, const SearchParams& params,
    std::span<const double> conditioning = {});

// One JSONL record: tokens, text, logprob, status, fsm_state,
// satisfied_count and, when `with_per_state` is set, per_state_best.
std::string DecodeResultToJson(const DecodeResult& result,
                               const Vocabulary& vocab, bool with_per_state);

}  // namespace cbs

#endif  // CBS_BEAM_SEARCH_H_
