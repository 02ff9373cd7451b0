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

#ifndef CBS_SCORER_H_
#define CBS_SCORER_H_

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cbs/errors.h"
#include "cbs/vocabulary.h"

namespace cbs {

class Scorer;

// Opaque per-hypothesis decoding state. States are immutable once returned
// by a scorer, so hypotheses that share a prefix share the state object.
class DecodeState {
 public:
  virtual ~DecodeState() = default;
  virtual std::unique_ptr<DecodeState> Clone() const = 0;

  const Scorer* owner() const { return owner_; }
  std::size_t vocab_size() const { return vocab_size_; }

 protected:
  DecodeState(const Scorer* owner, std::size_t vocab_size)
      : owner_(owner), vocab_size_(vocab_size) {}
  DecodeState(const DecodeState&) = default;
  DecodeState& operator=(const DecodeState&) = default;

 private:
  const Scorer* owner_;
  std::size_t vocab_size_;
};

// The state after consuming a token, plus the natural-log distribution over
// the next token.
struct ScoreStep {
  std::shared_ptr<const DecodeState> state;
  std::vector<double> log_probs;
};

// A conditional sequence model usable by the decoders. Implementations
// must be safe to call concurrently from several decodes.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t vocab_size() const = 0;

  // State for the empty prefix and the distribution over the first token.
  // `conditioning` is the per-input feature vector; scorers that take none
  // ignore it.
  virtual ScoreStep Start(std::span<const double> conditioning = {}) const = 0;

  // Consumes `token` and returns the distribution over the token after it.
  // Throws ContractViolation for states produced by another scorer or for a
  // different vocabulary size.
  virtual ScoreStep Step(const DecodeState& state, TokenId token) const = 0;

 protected:
  template <typename S>
  const S& CheckedState(const DecodeState& state) const {
    if (state.owner() != this) {
      throw ContractViolation("decode state belongs to a different scorer");
    }
    if (state.vocab_size() != vocab_size()) {
      throw ContractViolation("stale decode state: vocabulary size changed");
    }
    return static_cast<const S&>(state);
  }
  void CheckToken(TokenId token) const;
};

// Every conditional probability is 1/|V|.
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(std::size_t vocab_size);

  std::size_t vocab_size() const override { return vocab_size_; }
  ScoreStep Start(std::span<const double> conditioning = {}) const override;
  ScoreStep Step(const DecodeState& state, TokenId token) const override;

 private:
  std::size_t vocab_size_;
};

// Explicit first-order table: row t holds P(next | previous = t) and the
// extra last row holds P(first token). Rows are renormalized on
// construction; zero entries become -inf and are never extended by the
// decoders.
class BigramTableScorer : public Scorer {
 public:
  // `probs` has vocab_size + 1 rows of vocab_size non-negative entries.
  explicit BigramTableScorer(std::vector<std::vector<double>> probs);

  std::size_t vocab_size() const override { return vocab_size_; }
  ScoreStep Start(std::span<const double> conditioning = {}) const override;
  ScoreStep Step(const DecodeState& state, TokenId token) const override;

  double LogProb(std::optional<TokenId> previous, TokenId next) const;

 private:
  std::size_t vocab_size_;
  std::vector<std::vector<double>> log_probs_;
};

// Sum of per-step log probabilities of `tokens`, recomputed from scratch by
// stepping the scorer.
double SequenceLogProb(const Scorer& scorer, std::span<const TokenId> tokens,
                       std::span<const double> conditioning = {});

}  // namespace cbs

#endif  // CBS_SCORER_H_
