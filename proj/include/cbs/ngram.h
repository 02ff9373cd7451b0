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

#ifndef CBS_NGRAM_H_
#define CBS_NGRAM_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cbs/scorer.h"
#include "cbs/vocabulary.h"

namespace cbs {

// Context padding before the first token. Never emitted, never in V.
inline constexpr TokenId kStartSymbol = -1;

// Count-based n-gram model with add-alpha smoothing:
//   P(w | ctx) = (count(ctx, w) + alpha) / (count(ctx) + alpha * |V|)
// where ctx is the last order-1 tokens, left-padded with kStartSymbol.
class NGramModel {
 public:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> next;
    friend bool operator==(const ContextCounts&, const ContextCounts&) =
        default;
  };

  // Every sentence must end with vocab.eos(). Throws DataError for an empty
  // corpus or a sentence without the end marker, ContractViolation for
  // order 0 or alpha <= 0.
  static NGramModel Train(std::span<const std::vector<TokenId>> corpus,
                          Vocabulary vocab, int order, double alpha);

  // Uses the last order-1 entries of `context`.
  double LogProb(std::span<const TokenId> context, TokenId w) const;
  // Fills `out` with the log distribution over V for `context`.
  void LogDistribution(std::span<const TokenId> context,
                       std::vector<double>* out) const;

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::map<std::vector<TokenId>, ContextCounts>& counts() const {
    return counts_;
  }

  // Versioned JSON dump of vocabulary, order, alpha and counts.
  std::string ToJson() const;
  static NGramModel FromJson(const std::string& text);
  void Save(const std::string& path) const;
  static NGramModel Load(const std::string& path);

  friend bool operator==(const NGramModel&, const NGramModel&) = default;

 private:
  NGramModel(Vocabulary vocab, int order, double alpha)
      : vocab_(std::move(vocab)), order_(order), alpha_(alpha) {}

  std::vector<TokenId> ContextKey(std::span<const TokenId> context) const;

  Vocabulary vocab_;
  int order_;
  double alpha_;
  std::map<std::vector<TokenId>, ContextCounts> counts_;
};

class NGramScorer : public Scorer {
 public:
  explicit NGramScorer(std::shared_ptr<const NGramModel> model);

  std::size_t vocab_size() const override { return model_->vocab().size(); }
  ScoreStep Start(std::span<const double> conditioning = {}) const override;
  ScoreStep Step(const DecodeState& state, TokenId token) const override;

  const NGramModel& model() const { return *model_; }

 private:
  std::shared_ptr<const NGramModel> model_;
};

}  // namespace cbs

#endif  // CBS_NGRAM_H_
