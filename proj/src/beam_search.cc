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

#include "cbs/beam_search.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"

namespace cbs {
namespace {

// A hypothesis inside the search. Live nodes carry the scorer state and the
// distribution over their next token; completed nodes carry neither.
struct Node {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  StateId state = 0;
  bool completed = false;
  std::shared_ptr<const DecodeState> scorer_state;
  std::shared_ptr<const std::vector<double>> next_log_probs;

  Hypothesis ToHypothesis() const {
    return {tokens, logprob, state, completed};
  }
};

// Either an existing node kept as is (token < 0) or parent + token.
struct Candidate {
  const Node* parent;
  TokenId token;
  double logprob;
  std::size_t length;
};

double Score(double logprob, std::size_t length, bool normalize) {
  return normalize && length > 0 ? logprob / static_cast<double>(length)
                                 : logprob;
}

// Lexicographic comparison of (a_prefix + a_last) against (b_prefix + b_last)
// where a missing last token is passed as -1.
bool LexLess(std::span<const TokenId> a_prefix, TokenId a_last,
             std::span<const TokenId> b_prefix, TokenId b_last) {
  const std::size_t a_len = a_prefix.size() + (a_last >= 0 ? 1 : 0);
  const std::size_t b_len = b_prefix.size() + (b_last >= 0 ? 1 : 0);
  const std::size_t n = std::min(a_len, b_len);
  for (std::size_t k = 0; k < n; ++k) {
    const TokenId x = k < a_prefix.size() ? a_prefix[k] : a_last;
    const TokenId y = k < b_prefix.size() ? b_prefix[k] : b_last;
    if (x != y) return x < y;
  }
  return a_len < b_len;
}

class CandidateOrder {
 public:
  CandidateOrder(bool normalize, TokenId eos)
      : normalize_(normalize), eos_(eos) {}

  bool operator()(const Candidate& a, const Candidate& b) const {
    const double sa = Score(a.logprob, a.length, normalize_);
    const double sb = Score(b.logprob, b.length, normalize_);
    if (sa != sb) return sa > sb;
    if (a.length != b.length) return a.length < b.length;
    const bool ca = Completed(a), cb = Completed(b);
    if (ca != cb) return ca;
    return LexLess(a.parent->tokens, a.token, b.parent->tokens, b.token);
  }

 private:
  bool Completed(const Candidate& c) const {
    return c.token < 0 ? c.parent->completed : c.token == eos_;
  }

  bool normalize_;
  TokenId eos_;
};

bool NodeBefore(const Node& a, const Node& b, bool normalize) {
  const double sa = Score(a.logprob, a.tokens.size(), normalize);
  const double sb = Score(b.logprob, b.tokens.size(), normalize);
  if (sa != sb) return sa > sb;
  if (a.tokens.size() != b.tokens.size()) {
    return a.tokens.size() < b.tokens.size();
  }
  if (a.completed != b.completed) return a.completed;
  return a.tokens < b.tokens;
}

void Validate(const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
              const SearchParams& params) {
  if (vocab.size() == 0) throw ContractViolation("empty vocabulary");
  if (params.beam_size == 0) throw ContractViolation("beam size must be >= 1");
  if (params.max_len == 0) throw ContractViolation("max_len must be >= 1");
  if (scorer.vocab_size() != vocab.size()) {
    throw ContractViolation("scorer vocabulary size " +
                            std::to_string(scorer.vocab_size()) +
                            " != vocabulary size " +
                            std::to_string(vocab.size()));
  }
  if (fsm.vocab_size() != vocab.size()) {
    throw ContractViolation("fsm vocabulary size " +
                            std::to_string(fsm.vocab_size()) +
                            " != vocabulary size " +
                            std::to_string(vocab.size()));
  }
}

void CheckDistribution(const std::vector<double>& log_probs, std::size_t size) {
  if (log_probs.size() != size) {
    throw ContractViolation("scorer returned a distribution of size " +
                            std::to_string(log_probs.size()) + ", expected " +
                            std::to_string(size));
  }
}

class Search {
 public:
  Search(const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
         const SearchParams& params)
      : scorer_(scorer),
        fsm_(fsm),
        params_(params),
        eos_(vocab.eos()),
        vocab_size_(vocab.size()),
        order_(params.length_normalize, vocab.eos()),
        beams_(fsm.num_states()),
        finished_(fsm.num_states()) {}

  DecodeResult Run(std::span<const double> conditioning) {
    ScoreStep start = scorer_.Start(conditioning);
    CheckDistribution(start.log_probs, vocab_size_);
    Node root;
    root.state = fsm_.start();
    root.scorer_state = std::move(start.state);
    root.next_log_probs =
        std::make_shared<const std::vector<double>>(std::move(start.log_probs));
    beams_[static_cast<std::size_t>(fsm_.start())].push_back(std::move(root));

    DecodeResult result;
    for (std::size_t t = 1; t <= params_.max_len; ++t) {
      Expand();
      result.steps = t;
      if (ShouldStop()) break;
    }
    return Collect(result);
  }

 private:
  void Expand() {
    std::vector<std::vector<Candidate>> pools(beams_.size());
    std::vector<std::pair<double, TokenId>> scratch;
    for (const auto& beam : beams_) {
      for (const Node& node : beam) {
        if (node.completed) {
          pools[static_cast<std::size_t>(node.state)].push_back(
              {&node, -1, node.logprob, node.tokens.size()});
          continue;
        }
        AddExtensions(node, &pools, &scratch);
      }
    }
    std::vector<std::vector<Node>> next(beams_.size());
    for (std::size_t s = 0; s < pools.size(); ++s) {
      auto& pool = pools[s];
      const std::size_t keep = std::min(pool.size(), params_.beam_size);
      std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(keep),
                        pool.end(), order_);
      pool.resize(keep);
      next[s].reserve(keep);
      for (const Candidate& c : pool) next[s].push_back(Materialize(c, s));
    }
    beams_ = std::move(next);
    for (std::size_t s = 0; s < beams_.size(); ++s) {
      for (const Node& node : beams_[s]) {
        if (!node.completed) continue;
        auto& best = finished_[s];
        if (!best || NodeBefore(node, *best, params_.length_normalize)) {
          best = node;
        }
      }
    }
  }

  void AddExtensions(const Node& node,
                     std::vector<std::vector<Candidate>>* pools,
                     std::vector<std::pair<double, TokenId>>* scratch) {
    const auto& log_probs = *node.next_log_probs;
    const std::size_t length = node.tokens.size() + 1;
    const TokenId banned =
        params_.no_repeat && !node.tokens.empty() ? node.tokens.back() : -1;
    // At the length limit only the end marker can still yield an output.
    if (length == params_.max_len) {
      const double lp = log_probs[static_cast<std::size_t>(eos_)];
      if (eos_ != banned && !std::isinf(lp)) {
        (*pools)[static_cast<std::size_t>(fsm_.Step(node.state, eos_))].push_back(
            {&node, eos_, node.logprob + lp, length});
      }
      return;
    }
    const auto transitions = fsm_.transitions(node.state);
    auto add = [&](TokenId w, StateId dest) {
      const double lp = log_probs[static_cast<std::size_t>(w)];
      if (w == banned || std::isinf(lp)) return;
      (*pools)[static_cast<std::size_t>(dest)].push_back(
          {&node, w, node.logprob + lp, length});
    };
    for (const Transition& tr : transitions) add(tr.token, tr.target);

    // Tokens without an explicit transition all go to the default target;
    // only the best beam_size of them can survive there.
    const StateId dest = fsm_.default_target(node.state);
    const std::size_t wanted = params_.beam_size + transitions.size() + 1;
    auto is_explicit = [&](TokenId w) {
      return std::binary_search(
          transitions.begin(), transitions.end(), Transition{w, 0},
          [](const Transition& a, const Transition& b) { return a.token < b.token; });
    };
    if (wanted >= vocab_size_) {
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        const auto id = static_cast<TokenId>(w);
        if (!is_explicit(id)) add(id, dest);
      }
      return;
    }
    scratch->clear();
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      scratch->emplace_back(node.logprob + log_probs[w], static_cast<TokenId>(w));
    }
    // Same order as CandidateOrder for siblings: the end marker wins ties.
    auto better = [eos = eos_](const std::pair<double, TokenId>& a,
                               const std::pair<double, TokenId>& b) {
      if (a.first != b.first) return a.first > b.first;
      if ((a.second == eos) != (b.second == eos)) return a.second == eos;
      return a.second < b.second;
    };
    std::nth_element(scratch->begin(), scratch->begin() + static_cast<long>(wanted),
                     scratch->end(), better);
    scratch->resize(wanted);
    std::sort(scratch->begin(), scratch->end(), better);
    std::size_t taken = 0;
    for (const auto& [unused, w] : *scratch) {
      if (taken == params_.beam_size) break;
      if (w == banned || is_explicit(w) ||
          std::isinf(log_probs[static_cast<std::size_t>(w)])) {
        continue;
      }
      add(w, dest);
      ++taken;
    }
  }

  Node Materialize(const Candidate& c, std::size_t state) {
    if (c.token < 0) return *c.parent;
    Node node;
    node.tokens.reserve(c.parent->tokens.size() + 1);
    node.tokens = c.parent->tokens;
    node.tokens.push_back(c.token);
    node.logprob = c.logprob;
    node.state = static_cast<StateId>(state);
    node.completed = c.token == eos_;
    if (!node.completed) {
      ScoreStep step = scorer_.Step(*c.parent->scorer_state, c.token);
      CheckDistribution(step.log_probs, vocab_size_);
      node.scorer_state = std::move(step.state);
      node.next_log_probs =
          std::make_shared<const std::vector<double>>(std::move(step.log_probs));
    }
    return node;
  }

  bool ShouldStop() const {
    double best_live = -std::numeric_limits<double>::infinity();
    bool any_live = false;
    for (const auto& beam : beams_) {
      for (const Node& node : beam) {
        if (node.completed) continue;
        any_live = true;
        best_live = std::max(best_live, node.logprob);
      }
    }
    if (!any_live) return true;
    if (params_.length_normalize) return false;
    for (StateId s : fsm_.AcceptingStates()) {
      const auto& best = finished_[static_cast<std::size_t>(s)];
      if (best && best->logprob > best_live) return true;
    }
    return false;
  }

  DecodeResult Collect(DecodeResult result) const {
    const bool normalize = params_.length_normalize;
    const Node* accepted = nullptr;
    const Node* fallback = nullptr;
    for (std::size_t s = 0; s < finished_.size(); ++s) {
      const auto& best = finished_[s];
      if (!best) continue;
      result.per_state_best.emplace(static_cast<StateId>(s),
                                    best->ToHypothesis());
      if (fsm_.accepting(static_cast<StateId>(s))) {
        if (!accepted || NodeBefore(*best, *accepted, normalize)) {
          accepted = &*best;
        }
      }
      if (!fallback) {
        fallback = &*best;
        continue;
      }
      const int p = fsm_.progress(best->state);
      const int q = fsm_.progress(fallback->state);
      if (p > q || (p == q && NodeBefore(*best, *fallback, normalize))) {
        fallback = &*best;
      }
    }
    const Node* chosen = accepted ? accepted : fallback;
    result.status = accepted   ? DecodeStatus::kAccepted
                    : fallback ? DecodeStatus::kFallback
                               : DecodeStatus::kEmpty;
    if (chosen) {
      result.best = chosen->ToHypothesis();
      result.satisfied_count = fsm_.progress(chosen->state);
    }
    return result;
  }

  const Scorer& scorer_;
  const Fsm& fsm_;
  const SearchParams& params_;
  TokenId eos_;
  std::size_t vocab_size_;
  CandidateOrder order_;
  std::vector<std::vector<Node>> beams_;
  // Best completed node ever seen per state; survives beam pruning.
  std::vector<std::optional<Node>> finished_;
};

bool ResultBefore(const DecodeResult& a, const DecodeResult& b) {
  if (a.status != b.status) {
    return static_cast<int>(a.status) < static_cast<int>(b.status);
  }
  if (!a.best || !b.best) return a.best.has_value() && !b.best.has_value();
  if (a.status == DecodeStatus::kFallback &&
      a.satisfied_count != b.satisfied_count) {
    return a.satisfied_count > b.satisfied_count;
  }
  return RanksBefore(*a.best, *b.best);
}

}  // namespace

bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  if (a.tokens.size() != b.tokens.size()) {
    return a.tokens.size() < b.tokens.size();
  }
  if (a.completed != b.completed) return a.completed;
  return a.tokens < b.tokens;
}

const char* StatusName(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::kAccepted:
      return "accepted";
    case DecodeStatus::kFallback:
      return "fallback";
    case DecodeStatus::kEmpty:
      return "empty";
  }
  return "unknown";
}

DecodeResult ConstrainedBeamSearch(const Scorer& scorer, const Fsm& fsm,
                                   const Vocabulary& vocab,
                                   const SearchParams& params,
                                   std::span<const double> conditioning) {
  Validate(scorer, fsm, vocab, params);
  Search search(scorer, fsm, vocab, params);
  return search.Run(conditioning);
}

std::optional<Hypothesis> BeamSearch(const Scorer& scorer,
                                     const Vocabulary& vocab,
                                     const SearchParams& params,
                                     std::span<const double> conditioning) {
  const Fsm trivial = Fsm::AcceptAll(vocab.size());
  return ConstrainedBeamSearch(scorer, trivial, vocab, params, conditioning)
      .best;
}

MultiPhraseResult DecodeMultiPhrase(const Scorer& scorer,
                                    std::span<const Fsm> fsms,
                                    const Vocabulary& vocab,
                                    const SearchParams& params,
                                    std::span<const double> conditioning) {
  if (fsms.empty()) throw ContractViolation("need at least one phrase");
  MultiPhraseResult out;
  out.runs.reserve(fsms.size());
  for (const Fsm& fsm : fsms) {
    out.runs.push_back(
        ConstrainedBeamSearch(scorer, fsm, vocab, params, conditioning));
  }
  for (std::size_t k = 0; k < out.runs.size(); ++k) {
    if (out.runs[k].status == DecodeStatus::kEmpty) continue;
    if (!out.selected || ResultBefore(out.runs[k], out.runs[*out.selected])) {
      out.selected = k;
    }
  }
  if (out.selected) out.result = out.runs[*out.selected];
  return out;
}

MultiPhraseResult DecodeMultiPhrase(const Scorer& scorer,
                                    std::span<const PhraseConstraint> phrases,
                                    const Vocabulary& vocab,
                                    const SearchParams& params,
                                    std::span<const double> conditioning) {
  std::vector<Fsm> fsms;
  fsms.reserve(phrases.size());
  for (const auto& p : phrases) fsms.push_back(CompilePhrase(p, vocab.size()));
  return DecodeMultiPhrase(scorer, fsms, vocab, params, conditioning);
}

std::string DecodeResultToJson(const DecodeResult& result,
                               const Vocabulary& vocab, bool with_per_state) {
  using nlohmann::json;
  auto words = [&](const Hypothesis& h) {
    std::vector<std::string> out;
    for (TokenId t : h.tokens) out.push_back(vocab.Word(t));
    return out;
  };
  auto text = [&](const Hypothesis& h) {
    std::vector<TokenId> content = h.tokens;
    if (!content.empty() && content.back() == vocab.eos()) content.pop_back();
    return vocab.Decode(content);
  };
  json out;
  if (result.best) {
    out["tokens"] = words(*result.best);
    out["text"] = text(*result.best);
    out["logprob"] = result.best->logprob;
    out["fsm_state"] = result.best->fsm_state;
  } else {
    out["tokens"] = json::array();
    out["text"] = "";
    out["logprob"] = nullptr;
    out["fsm_state"] = nullptr;
  }
  out["status"] = StatusName(result.status);
  out["satisfied_count"] = result.satisfied_count;
  if (with_per_state) {
    json per_state = json::array();
    for (const auto& [state, h] : result.per_state_best) {
      per_state.push_back({{"state", state},
                           {"tokens", words(h)},
                           {"text", text(h)},
                           {"logprob", h.logprob}});
    }
    out["per_state_best"] = std::move(per_state);
  }
  return out.dump();
}

}  // namespace cbs
