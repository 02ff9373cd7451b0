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

#include "cbs/fsm.h"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>
#include <utility>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"

namespace cbs {

using nlohmann::json;

Fsm::Fsm(std::size_t vocab_size, std::vector<FsmState> states, StateId start)
    : vocab_size_(vocab_size), states_(std::move(states)), start_(start) {
  const auto n = static_cast<StateId>(states_.size());
  if (n == 0) throw ContractViolation("fsm needs at least one state");
  if (start_ < 0 || start_ >= n) {
    throw ContractViolation("fsm start state out of range");
  }
  for (auto& s : states_) {
    if (s.default_target < 0 || s.default_target >= n) {
      throw ContractViolation("fsm default target out of range");
    }
    std::sort(s.transitions.begin(), s.transitions.end(),
              [](const Transition& a, const Transition& b) {
                return a.token < b.token;
              });
    for (std::size_t k = 0; k < s.transitions.size(); ++k) {
      const auto& t = s.transitions[k];
      if (t.token < 0 || static_cast<std::size_t>(t.token) >= vocab_size_) {
        throw ContractViolation("fsm transition token out of range: " +
                                std::to_string(t.token));
      }
      if (t.target < 0 || t.target >= n) {
        throw ContractViolation("fsm transition target out of range");
      }
      if (k > 0 && s.transitions[k - 1].token == t.token) {
        throw ContractViolation("fsm is not deterministic: token " +
                                std::to_string(t.token) + " listed twice");
      }
    }
    std::erase_if(s.transitions, [&](const Transition& t) {
      return t.target == s.default_target;
    });
  }
}

Fsm Fsm::AcceptAll(std::size_t vocab_size) {
  FsmState only;
  only.default_target = 0;
  only.accepting = true;
  return Fsm(vocab_size, {only}, 0);
}

const FsmState& Fsm::state(StateId s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= states_.size()) {
    throw ContractViolation("fsm state out of range: " + std::to_string(s));
  }
  return states_[static_cast<std::size_t>(s)];
}

StateId Fsm::Step(StateId s, TokenId w) const {
  const FsmState& st = state(s);
  if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_) {
    throw ContractViolation("token id out of range: " + std::to_string(w));
  }
  auto it = std::lower_bound(
      st.transitions.begin(), st.transitions.end(), w,
      [](const Transition& t, TokenId token) { return t.token < token; });
  if (it != st.transitions.end() && it->token == w) return it->target;
  return st.default_target;
}

std::vector<StateId> Fsm::AcceptingStates() const {
  std::vector<StateId> out;
  for (std::size_t s = 0; s < states_.size(); ++s) {
    if (states_[s].accepting) out.push_back(static_cast<StateId>(s));
  }
  return out;
}

Fsm CompileDisjunctions(const DisjunctiveConstraints& constraints,
                        std::size_t vocab_size, std::size_t max_disjunctions) {
  const std::size_t m = constraints.disjunctions.size();
  if (m > max_disjunctions) {
    throw CapacityError("too many disjunctions: " + std::to_string(m) +
                        " (cap " + std::to_string(max_disjunctions) + ", " +
                        "one beam per subset)");
  }
  // Bits set by reading each constrained token.
  std::map<TokenId, std::uint32_t> token_bits;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& d = constraints.disjunctions[i];
    if (d.empty()) {
      throw ConstraintError("disjunction " + std::to_string(i) + " is empty");
    }
    for (TokenId w : d) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
        throw ConstraintError("invalid token id in disjunction " +
                              std::to_string(i) + ": " + std::to_string(w));
      }
      token_bits[w] |= 1u << i;
    }
  }
  const std::uint32_t full = m == 0 ? 0u : (m == 32 ? ~0u : (1u << m) - 1u);
  std::vector<FsmState> states(std::size_t{1} << m);
  for (std::uint32_t mask = 0; mask < states.size(); ++mask) {
    FsmState& s = states[mask];
    s.default_target = static_cast<StateId>(mask);
    s.accepting = mask == full;
    s.progress = std::popcount(mask);
    for (const auto& [token, bits] : token_bits) {
      const std::uint32_t next = mask | bits;
      if (next != mask) {
        s.transitions.push_back({token, static_cast<StateId>(next)});
      }
    }
  }
  return Fsm(vocab_size, std::move(states), 0);
}

Fsm CompilePhrase(const PhraseConstraint& phrase, std::size_t vocab_size) {
  const auto& p = phrase.tokens;
  const std::size_t n = p.size();
  if (n == 0) throw ConstraintError("phrase constraint is empty");
  for (TokenId w : p) {
    if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
      throw ConstraintError("invalid token id in phrase: " + std::to_string(w));
    }
  }
  // failure[k] = length of the longest proper suffix of p[0..k] that is also
  // a prefix of p.
  std::vector<std::size_t> failure(n, 0);
  for (std::size_t k = 1, len = 0; k < n; ++k) {
    while (len > 0 && p[k] != p[len]) len = failure[len - 1];
    if (p[k] == p[len]) ++len;
    failure[k] = len;
  }
  std::vector<TokenId> alphabet(p.begin(), p.end());
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());

  // next[k][a] over the phrase alphabet; everything else resets to 0.
  std::vector<std::vector<StateId>> next(n, std::vector<StateId>(alphabet.size()));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      if (alphabet[a] == p[k]) {
        next[k][a] = static_cast<StateId>(k + 1);
      } else if (k == 0) {
        next[k][a] = 0;
      } else {
        next[k][a] = next[failure[k - 1]][a];
      }
    }
  }
  std::vector<FsmState> states(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    FsmState& s = states[k];
    s.default_target = 0;
    s.progress = static_cast<int>(k);
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      s.transitions.push_back({alphabet[a], next[k][a]});
    }
  }
  FsmState& done = states[n];
  done.default_target = static_cast<StateId>(n);
  done.accepting = true;
  done.progress = static_cast<int>(n);
  return Fsm(vocab_size, std::move(states), 0);
}

Fsm Intersect(const Fsm& a, const Fsm& b, std::size_t max_states) {
  if (a.vocab_size() != b.vocab_size()) {
    throw ContractViolation("cannot intersect machines over different "
                            "vocabularies");
  }
  using Pair = std::pair<StateId, StateId>;
  std::map<Pair, StateId> ids;
  std::vector<Pair> order;
  auto intern = [&](Pair p) {
    auto [it, inserted] = ids.emplace(p, static_cast<StateId>(order.size()));
    if (inserted) {
      if (order.size() >= max_states) {
        throw CapacityError("product machine exceeds " +
                            std::to_string(max_states) + " states");
      }
      order.push_back(p);
    }
    return it->second;
  };
  intern({a.start(), b.start()});
  std::vector<FsmState> states;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto [sa, sb] = order[k];
    FsmState s;
    s.accepting = a.accepting(sa) && b.accepting(sb);
    s.progress = a.progress(sa) + b.progress(sb);
    s.default_target = intern({a.default_target(sa), b.default_target(sb)});
    std::vector<TokenId> tokens;
    for (const auto& t : a.transitions(sa)) tokens.push_back(t.token);
    for (const auto& t : b.transitions(sb)) tokens.push_back(t.token);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (TokenId w : tokens) {
      const StateId target = intern({a.Step(sa, w), b.Step(sb, w)});
      if (target != s.default_target) s.transitions.push_back({w, target});
    }
    states.push_back(std::move(s));
  }
  return Fsm(a.vocab_size(), std::move(states), 0);
}

StateId Run(const Fsm& fsm, std::span<const TokenId> seq) {
  StateId s = fsm.start();
  for (TokenId w : seq) s = fsm.Step(s, w);
  return s;
}

bool Recognizes(const Fsm& fsm, std::span<const TokenId> seq) {
  return fsm.accepting(Run(fsm, seq));
}

std::string DumpFsmJson(const Fsm& fsm, const Vocabulary& vocab) {
  if (vocab.size() != fsm.vocab_size()) {
    throw ContractViolation("fsm and vocabulary sizes differ");
  }
  json states = json::array();
  for (std::size_t s = 0; s < fsm.num_states(); ++s) {
    const auto id = static_cast<StateId>(s);
    json transitions = json::array();
    for (const auto& t : fsm.transitions(id)) {
      transitions.push_back({{"token", vocab.Word(t.token)}, {"to", t.target}});
    }
    states.push_back({{"id", id},
                      {"default", fsm.default_target(id)},
                      {"progress", fsm.progress(id)},
                      {"transitions", std::move(transitions)}});
  }
  json out = {{"num_states", fsm.num_states()},
              {"start", fsm.start()},
              {"accepting", fsm.AcceptingStates()},
              {"vocab_size", fsm.vocab_size()},
              {"states", std::move(states)}};
  return out.dump(2);
}

Fsm ParseFsmJson(const std::string& text, const Vocabulary& vocab) {
  json in;
  try {
    in = json::parse(text);
    const auto n = in.at("num_states").get<std::size_t>();
    std::vector<FsmState> states(n);
    for (const auto& s : in.at("states")) {
      const auto id = s.at("id").get<std::size_t>();
      if (id >= n) throw ParseError("fsm dump: state id out of range");
      states[id].default_target = s.at("default").get<StateId>();
      states[id].progress = s.value("progress", 0);
      for (const auto& t : s.at("transitions")) {
        states[id].transitions.push_back(
            {vocab.Id(t.at("token").get<std::string>()),
             t.at("to").get<StateId>()});
      }
    }
    for (auto a : in.at("accepting")) {
      const auto id = a.get<std::size_t>();
      if (id >= n) throw ParseError("fsm dump: accepting state out of range");
      states[id].accepting = true;
    }
    return Fsm(vocab.size(), std::move(states), in.at("start").get<StateId>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("fsm dump: ") + e.what());
  }
}

}  // namespace cbs
