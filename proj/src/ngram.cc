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

#include "cbs/ngram.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"
#include "cbs/text.h"

namespace cbs {

using nlohmann::json;

namespace {

constexpr int kNGramFormatVersion = 1;

class NGramState : public DecodeState {
 public:
  NGramState(const Scorer* owner, std::size_t vocab_size,
             std::vector<TokenId> history)
      : DecodeState(owner, vocab_size), history(std::move(history)) {}
  std::unique_ptr<DecodeState> Clone() const override {
    return std::make_unique<NGramState>(*this);
  }
  // Last order-1 tokens, left-padded with kStartSymbol.
  std::vector<TokenId> history;
};

}  // namespace

NGramModel NGramModel::Train(std::span<const std::vector<TokenId>> corpus,
                             Vocabulary vocab, int order, double alpha) {
  if (order < 1) throw ContractViolation("n-gram order must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractViolation("smoothing constant must be finite and > 0");
  }
  if (corpus.empty()) throw DataError("empty training corpus");
  NGramModel model(std::move(vocab), order, alpha);
  const auto ctx_len = static_cast<std::size_t>(order - 1);
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const auto& sentence = corpus[n];
    if (sentence.empty() || sentence.back() != model.vocab_.eos()) {
      throw DataError("sentence " + std::to_string(n + 1) +
                      " does not end with the end marker");
    }
    std::vector<TokenId> ctx(ctx_len, kStartSymbol);
    for (TokenId w : sentence) {
      if (!model.vocab_.Valid(w)) {
        throw DataError("sentence " + std::to_string(n + 1) +
                        " has an out-of-range token id");
      }
      auto& counts = model.counts_[ctx];
      ++counts.total;
      ++counts.next[w];
      if (ctx_len > 0) {
        ctx.erase(ctx.begin());
        ctx.push_back(w);
      }
    }
  }
  return model;
}

std::vector<TokenId> NGramModel::ContextKey(
    std::span<const TokenId> context) const {
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> key(ctx_len, kStartSymbol);
  const std::size_t take = std::min(ctx_len, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            key.end() - static_cast<std::ptrdiff_t>(take));
  return key;
}

double NGramModel::LogProb(std::span<const TokenId> context, TokenId w) const {
  if (!vocab_.Valid(w)) {
    throw ContractViolation("token id out of range: " + std::to_string(w));
  }
  const double v = static_cast<double>(vocab_.size());
  auto it = counts_.find(ContextKey(context));
  if (it == counts_.end()) return std::log(alpha_ / (alpha_ * v));
  const auto& c = it->second;
  auto hit = c.next.find(w);
  const double num =
      (hit == c.next.end() ? 0.0 : static_cast<double>(hit->second)) + alpha_;
  return std::log(num / (static_cast<double>(c.total) + alpha_ * v));
}

void NGramModel::LogDistribution(std::span<const TokenId> context,
                                 std::vector<double>* out) const {
  const double v = static_cast<double>(vocab_.size());
  auto it = counts_.find(ContextKey(context));
  if (it == counts_.end()) {
    out->assign(vocab_.size(), std::log(alpha_ / (alpha_ * v)));
    return;
  }
  const auto& c = it->second;
  const double denom = static_cast<double>(c.total) + alpha_ * v;
  out->assign(vocab_.size(), std::log(alpha_ / denom));
  for (const auto& [w, n] : c.next) {
    (*out)[static_cast<std::size_t>(w)] =
        std::log((static_cast<double>(n) + alpha_) / denom);
  }
}

std::string NGramModel::ToJson() const {
  json contexts = json::array();
  for (const auto& [ctx, c] : counts_) {
    json next = json::array();
    for (const auto& [w, n] : c.next) next.push_back({w, n});
    contexts.push_back({{"context", ctx}, {"total", c.total}, {"next", next}});
  }
  json out = {{"format", "cbs-ngram"},
              {"version", kNGramFormatVersion},
              {"order", order_},
              {"alpha", alpha_},
              {"eos", vocab_.eos_string()},
              {"vocab", vocab_.tokens()},
              {"contexts", std::move(contexts)}};
  return out.dump();
}

NGramModel NGramModel::FromJson(const std::string& text) {
  try {
    const json in = json::parse(text);
    if (in.value("format", "") != "cbs-ngram") {
      throw ParseError("not an n-gram model file");
    }
    if (in.at("version").get<int>() != kNGramFormatVersion) {
      throw ParseError("unsupported n-gram model version " +
                       in.at("version").dump());
    }
    NGramModel model(Vocabulary(in.at("vocab").get<std::vector<std::string>>(),
                                in.at("eos").get<std::string>()),
                     in.at("order").get<int>(), in.at("alpha").get<double>());
    if (model.order_ < 1 || !(model.alpha_ > 0.0)) {
      throw ParseError("n-gram model has invalid order or alpha");
    }
    for (const auto& c : in.at("contexts")) {
      ContextCounts counts;
      counts.total = c.at("total").get<std::uint64_t>();
      for (const auto& pair : c.at("next")) {
        const auto w = pair.at(0).get<TokenId>();
        if (!model.vocab_.Valid(w)) throw ParseError("n-gram token out of range");
        counts.next[w] = pair.at(1).get<std::uint64_t>();
      }
      auto ctx = c.at("context").get<std::vector<TokenId>>();
      if (ctx.size() != static_cast<std::size_t>(model.order_ - 1)) {
        throw ParseError("n-gram context has wrong length");
      }
      model.counts_.emplace(std::move(ctx), std::move(counts));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("n-gram model: ") + e.what());
  }
}

void NGramModel::Save(const std::string& path) const { WriteFile(path, ToJson()); }

NGramModel NGramModel::Load(const std::string& path) {
  return FromJson(ReadFile(path));
}

NGramScorer::NGramScorer(std::shared_ptr<const NGramModel> model)
    : model_(std::move(model)) {
  if (!model_) throw ContractViolation("null n-gram model");
}

ScoreStep NGramScorer::Start(std::span<const double>) const {
  std::vector<TokenId> history(static_cast<std::size_t>(model_->order() - 1),
                               kStartSymbol);
  ScoreStep step;
  model_->LogDistribution(history, &step.log_probs);
  step.state = std::make_shared<NGramState>(this, vocab_size(), std::move(history));
  return step;
}

ScoreStep NGramScorer::Step(const DecodeState& state, TokenId token) const {
  const auto& s = CheckedState<NGramState>(state);
  CheckToken(token);
  std::vector<TokenId> history = s.history;
  if (!history.empty()) {
    history.erase(history.begin());
    history.push_back(token);
  }
  ScoreStep step;
  model_->LogDistribution(history, &step.log_probs);
  step.state = std::make_shared<NGramState>(this, vocab_size(), std::move(history));
  return step;
}

}  // namespace cbs
