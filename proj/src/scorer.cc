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

#include "cbs/scorer.h"

#include <cmath>
#include <limits>

namespace cbs {
namespace {

class UniformState : public DecodeState {
 public:
  UniformState(const Scorer* owner, std::size_t vocab_size)
      : DecodeState(owner, vocab_size) {}
  std::unique_ptr<DecodeState> Clone() const override {
    return std::make_unique<UniformState>(*this);
  }
};

class BigramState : public DecodeState {
 public:
  BigramState(const Scorer* owner, std::size_t vocab_size, TokenId previous)
      : DecodeState(owner, vocab_size), previous(previous) {}
  std::unique_ptr<DecodeState> Clone() const override {
    return std::make_unique<BigramState>(*this);
  }
  TokenId previous;
};

}  // namespace

void Scorer::CheckToken(TokenId token) const {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size()) {
    throw ContractViolation("token id out of range: " + std::to_string(token));
  }
}

UniformScorer::UniformScorer(std::size_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size == 0) throw ContractViolation("empty vocabulary");
}

ScoreStep UniformScorer::Start(std::span<const double>) const {
  return {std::make_shared<UniformState>(this, vocab_size_),
          std::vector<double>(vocab_size_,
                              -std::log(static_cast<double>(vocab_size_)))};
}

ScoreStep UniformScorer::Step(const DecodeState& state, TokenId token) const {
  CheckedState<UniformState>(state);
  CheckToken(token);
  return Start();
}

BigramTableScorer::BigramTableScorer(std::vector<std::vector<double>> probs) {
  if (probs.size() < 2) throw ContractViolation("bigram table needs |V| >= 1");
  vocab_size_ = probs.size() - 1;
  log_probs_.reserve(probs.size());
  for (auto& row : probs) {
    if (row.size() != vocab_size_) {
      throw ContractViolation("bigram table row has wrong width");
    }
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ContractViolation("bigram probabilities must be finite and >= 0");
      }
      total += p;
    }
    if (!(total > 0.0)) throw ContractViolation("bigram row sums to zero");
    std::vector<double> logs(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      logs[w] = row[w] > 0.0 ? std::log(row[w] / total)
                             : -std::numeric_limits<double>::infinity();
    }
    log_probs_.push_back(std::move(logs));
  }
}

ScoreStep BigramTableScorer::Start(std::span<const double>) const {
  return {std::make_shared<BigramState>(this, vocab_size_, -1),
          log_probs_.back()};
}

ScoreStep BigramTableScorer::Step(const DecodeState& state,
                                  TokenId token) const {
  CheckedState<BigramState>(state);
  CheckToken(token);
  return {std::make_shared<BigramState>(this, vocab_size_, token),
          log_probs_[static_cast<std::size_t>(token)]};
}

double BigramTableScorer::LogProb(std::optional<TokenId> previous,
                                  TokenId next) const {
  CheckToken(next);
  if (!previous) return log_probs_.back()[static_cast<std::size_t>(next)];
  CheckToken(*previous);
  return log_probs_[static_cast<std::size_t>(*previous)]
                   [static_cast<std::size_t>(next)];
}

double SequenceLogProb(const Scorer& scorer, std::span<const TokenId> tokens,
                       std::span<const double> conditioning) {
  ScoreStep step = scorer.Start(conditioning);
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] < 0 ||
        static_cast<std::size_t>(tokens[t]) >= step.log_probs.size()) {
      throw ContractViolation("token id out of range");
    }
    total += step.log_probs[static_cast<std::size_t>(tokens[t])];
    if (t + 1 < tokens.size()) step = scorer.Step(*step.state, tokens[t]);
  }
  return total;
}

}  // namespace cbs
