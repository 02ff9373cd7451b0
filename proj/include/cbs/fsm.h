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

#ifndef CBS_FSM_H_
#define CBS_FSM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbs/vocabulary.h"

namespace cbs {

using StateId = std::int32_t;

inline constexpr std::size_t kMaxDisjunctions = 16;
inline constexpr std::size_t kMaxProductStates = 4096;

// Conjunction of m disjunctive word sets: a sequence satisfies it iff every
// set has at least one member somewhere in the sequence.
struct DisjunctiveConstraints {
  std::vector<std::vector<TokenId>> disjunctions;
};

// A contiguous run of tokens that must appear in the output.
struct PhraseConstraint {
  std::vector<TokenId> tokens;
};

struct Transition {
  TokenId token;
  StateId target;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// One state of an Fsm. Every token not listed in `transitions` moves to
// `default_target`; listed tokens are sorted by id and never point at the
// default. `progress` counts satisfied constraints (disjunction bits,
// matched phrase prefix length) and drives the decoder's fallback choice.
struct FsmState {
  StateId default_target = 0;
  std::vector<Transition> transitions;
  bool accepting = false;
  int progress = 0;

  friend bool operator==(const FsmState&, const FsmState&) = default;
};

// Deterministic finite-state machine with a total transition function over
// a vocabulary of `vocab_size` tokens. Immutable once built.
class Fsm {
 public:
  // Validates and normalizes `states`: transitions are sorted, entries that
  // equal the default are dropped, duplicates and out-of-range ids raise
  // ContractViolation.
  Fsm(std::size_t vocab_size, std::vector<FsmState> states, StateId start);

  // Single accepting state where every token self-loops.
  static Fsm AcceptAll(std::size_t vocab_size);

  std::size_t num_states() const { return states_.size(); }
  std::size_t vocab_size() const { return vocab_size_; }
  StateId start() const { return start_; }

  // δ(s, w). Throws ContractViolation for out-of-range arguments.
  StateId Step(StateId s, TokenId w) const;

  bool accepting(StateId s) const { return state(s).accepting; }
  int progress(StateId s) const { return state(s).progress; }
  StateId default_target(StateId s) const { return state(s).default_target; }
  std::span<const Transition> transitions(StateId s) const {
    return state(s).transitions;
  }
  std::vector<StateId> AcceptingStates() const;
  const std::vector<FsmState>& states() const { return states_; }

  friend bool operator==(const Fsm&, const Fsm&) = default;

 private:
  const FsmState& state(StateId s) const;

  std::size_t vocab_size_;
  std::vector<FsmState> states_;
  StateId start_;
};

// 2^m states, state id = bitmask of satisfied disjunctions. Bits never
// clear. Throws ConstraintError for invalid ids or empty sets and
// CapacityError when m > max_disjunctions.
Fsm CompileDisjunctions(const DisjunctiveConstraints& constraints,
                        std::size_t vocab_size,
                        std::size_t max_disjunctions = kMaxDisjunctions);

// len+1 states; state k is the length of the longest suffix of the input
// that is a prefix of the phrase. Mismatches follow the prefix-failure
// function, and the final state is absorbing.
Fsm CompilePhrase(const PhraseConstraint& phrase, std::size_t vocab_size);

// Product construction restricted to reachable pairs. Accepts the
// intersection of both languages; progress adds up.
Fsm Intersect(const Fsm& a, const Fsm& b,
              std::size_t max_states = kMaxProductStates);

// Folds Step over `seq` from the start state.
StateId Run(const Fsm& fsm, std::span<const TokenId> seq);

bool Recognizes(const Fsm& fsm, std::span<const TokenId> seq);

// Debug dump: num_states, start, accepting, and for every state its
// default target plus the sparse transitions that differ from it. Words are
// written as surface strings.
std::string DumpFsmJson(const Fsm& fsm, const Vocabulary& vocab);
Fsm ParseFsmJson(const std::string& text, const Vocabulary& vocab);

}  // namespace cbs

#endif  // CBS_FSM_H_
