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

#include "cbs/oracle.h"

#include <cmath>

#include "cbs/errors.h"

namespace cbs {
namespace {

class Enumerator {
 public:
  Enumerator(const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
             const SearchParams& params, std::size_t max_sequences)
      : scorer_(scorer),
        fsm_(fsm),
        eos_(vocab.eos()),
        vocab_size_(vocab.size()),
        params_(params),
        max_sequences_(max_sequences) {}

  std::optional<Hypothesis> Run(std::span<const double> conditioning) {
    std::vector<TokenId> prefix;
    Visit(&prefix, 0.0, fsm_.start(), scorer_.Start(conditioning));
    return best_;
  }

 private:
  void Visit(std::vector<TokenId>* prefix, double logprob, StateId state,
             const ScoreStep& step) {
    if (++visited_ > max_sequences_) {
      throw CapacityError("exhaustive search exceeds " +
                          std::to_string(max_sequences_) + " prefixes");
    }
    for (std::size_t k = 0; k < vocab_size_; ++k) {
      const auto w = static_cast<TokenId>(k);
      if (params_.no_repeat && !prefix->empty() && prefix->back() == w) continue;
      const double lp = step.log_probs[k];
      if (std::isinf(lp)) continue;
      const double total = logprob + lp;
      const StateId next = fsm_.Step(state, w);
      prefix->push_back(w);
      if (w == eos_) {
        if (fsm_.accepting(next)) {
          Hypothesis h{*prefix, total, next, true};
          if (!best_ || RanksBefore(h, *best_)) best_ = std::move(h);
        }
      } else if (prefix->size() < params_.max_len) {
        Visit(prefix, total, next, scorer_.Step(*step.state, w));
      }
      prefix->pop_back();
    }
  }

  const Scorer& scorer_;
  const Fsm& fsm_;
  TokenId eos_;
  std::size_t vocab_size_;
  const SearchParams& params_;
  std::size_t max_sequences_;
  std::size_t visited_ = 0;
  std::optional<Hypothesis> best_;
};

}  // namespace

std::optional<Hypothesis> ExhaustiveDecode(const Scorer& scorer, const Fsm& fsm,
                                           const Vocabulary& vocab,
                                           const SearchParams& params,
                                           std::span<const double> conditioning,
                                           std::size_t max_sequences) {
  if (scorer.vocab_size() != vocab.size() || fsm.vocab_size() != vocab.size()) {
    throw ContractViolation("scorer, fsm and vocabulary sizes differ");
  }
  if (params.max_len == 0) throw ContractViolation("max_len must be >= 1");
  return Enumerator(scorer, fsm, vocab, params, max_sequences).Run(conditioning);
}

}  // namespace cbs
