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

#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "cbs/beam_search.h"
#include "cbs/caption_model.h"
#include "cbs/errors.h"
#include "cbs/lstm.h"
#include "cbs/ngram.h"
#include "gradient_check.h"

namespace cbs::nn {
namespace {

double Sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Gate equations evaluated entry by entry, without Eigen expressions.
LstmCellState RefLstm(const LstmLayerParams& p, const Vector& x,
                      const LstmCellState& prev) {
  const int n = p.hidden_size(), k = p.input_size();
  LstmCellState out = LstmCellState::Zero(n);
  for (int r = 0; r < n; ++r) {
    double z[kNumGates];
    for (int g = 0; g < kNumGates; ++g) {
      double acc = p.biases[g](r);
      for (int j = 0; j < k; ++j) acc += p.input_weights[g](r, j) * x(j);
      for (int j = 0; j < n; ++j) acc += p.recurrent_weights[g](r, j) * prev.h(j);
      z[g] = acc;
    }
    const double i = Sigm(z[kInputGate]), f = Sigm(z[kForgetGate]),
                 o = Sigm(z[kOutputGate]), g = std::tanh(z[kCellGate]);
    out.c(r) = f * prev.c(r) + i * g;
    out.h(r) = o * std::tanh(out.c(r));
  }
  return out;
}

void Randomize(LstmLayerParams* p, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (int g = 0; g < kNumGates; ++g) {
    for (auto* m : {&p->input_weights[g], &p->recurrent_weights[g]}) {
      for (Eigen::Index k = 0; k < m->size(); ++k) m->data()[k] = u(rng);
    }
    for (Eigen::Index k = 0; k < p->biases[g].size(); ++k) p->biases[g](k) = u(rng);
  }
}

Vocabulary Words(int n) {
  std::vector<std::string> w;
  for (int k = 0; k + 1 < n; ++k) w.push_back("w" + std::to_string(k));
  return Vocabulary(std::move(w));
}

CaptionModelParams RandomModel(int v, int d, int n, int f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Matrix emb(d, v);
  for (Eigen::Index k = 0; k < emb.size(); ++k) emb.data()[k] = u(rng);
  CaptionModelParams m = InitCaptionModel(Words(v), emb, n, f, seed + 1);
  VisitTrainable(m, [&](const std::string&, auto& block) {
    for (Eigen::Index k = 0; k < block.size(); ++k) block.data()[k] = u(rng);
  });
  return m;
}

std::vector<double> RandomVec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Whole-sequence log probability computed in one pass from the equations.
double UnrolledLogProb(const CaptionModelParams& m, const std::vector<TokenId>& seq,
                       const std::vector<double>& cond) {
  const int n = m.hidden_size(), f = m.conditioning_dim();
  LstmCellState s1 = LstmCellState::Zero(n), s2 = LstmCellState::Zero(n);
  double total = 0.0;
  TokenId prev = kStartSymbol;
  for (TokenId y : seq) {
    const Vector x1 = prev == kStartSymbol ? m.start_embedding
                                           : Vector(m.embeddings.col(prev));
    s1 = RefLstm(m.layer1, x1, s1);
    Vector x2(n + f);
    for (int k = 0; k < n; ++k) x2(k) = s1.h(k);
    for (int k = 0; k < f; ++k) x2(n + k) = cond[k];
    s2 = RefLstm(m.layer2, x2, s2);
    Vector v(m.embedding_dim());
    for (int r = 0; r < v.size(); ++r) {
      double acc = m.projection_bias(r);
      for (int j = 0; j < n; ++j) acc += m.projection(r, j) * s2.h(j);
      v(r) = std::tanh(acc);
    }
    std::vector<double> logits(m.vocab.size());
    double mx = -INFINITY;
    for (std::size_t w = 0; w < logits.size(); ++w) {
      double acc = 0.0;
      for (int r = 0; r < v.size(); ++r) acc += m.embeddings(r, w) * v(r);
      logits[w] = acc;
      mx = std::max(mx, acc);
    }
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    total += logits[y] - mx - std::log(z);
    prev = y;
  }
  return total;
}

TEST(LstmStepTest, ZeroEverything) {
  const auto p = LstmLayerParams::Zero(3, 2);
  LstmStepCache cache;
  const auto out = LstmStep(p, Vector::Zero(2), LstmCellState::Zero(3), &cache);
  for (int g : {kInputGate, kForgetGate, kOutputGate}) {
    EXPECT_TRUE(cache.gates[g].isApprox(Vector::Constant(3, 0.5)));
  }
  EXPECT_EQ(cache.gates[kCellGate], Vector::Zero(3));
  EXPECT_EQ(out.c, Vector::Zero(3));
  EXPECT_EQ(out.h, Vector::Zero(3));
}

TEST(LstmStepTest, ForgetGateSaturation) {
  auto p = LstmLayerParams::Zero(3, 2);
  p.biases[kForgetGate].setConstant(50.0);
  LstmCellState prev{Vector::Zero(3), Vector(3)};
  prev.c << 0.3, -1.2, 2.0;
  const auto out = LstmStep(p, Vector::Zero(2), prev);
  EXPECT_TRUE(out.c.isApprox(prev.c, 1e-12));
}

TEST(LstmStepTest, MatchesEquationOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = LstmLayerParams::Zero(4, 3);
    Randomize(&p, rng, 1.0);
    const auto x = RandomVec(3, rng), h = RandomVec(4, rng), c = RandomVec(4, rng);
    const LstmCellState prev{Eigen::Map<const Vector>(h.data(), 4),
                             Eigen::Map<const Vector>(c.data(), 4)};
    const Vector xv = Eigen::Map<const Vector>(x.data(), 3);
    const auto got = LstmStep(p, xv, prev);
    const auto want = RefLstm(p, xv, prev);
    EXPECT_LE((got.h - want.h).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((got.c - want.c).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LstmStepTest, GateRanges) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = LstmLayerParams::Zero(5, 3);
    Randomize(&p, rng, 3.0);
    LstmStepCache cache;
    const auto x = RandomVec(3, rng);
    const auto out = LstmStep(p, Eigen::Map<const Vector>(x.data(), 3),
                              LstmCellState::Zero(5), &cache);
    for (int g : {kInputGate, kForgetGate, kOutputGate}) {
      EXPECT_GT(cache.gates[g].minCoeff(), 0.0);
      EXPECT_LT(cache.gates[g].maxCoeff(), 1.0);
    }
    EXPECT_LT(cache.gates[kCellGate].cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LT(out.h.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(LstmStepTest, Errors) {
  const auto p = LstmLayerParams::Zero(3, 2);
  EXPECT_THROW(LstmStep(p, Vector::Zero(3), LstmCellState::Zero(3)),
               ContractViolation);
  Vector bad = Vector::Zero(2);
  bad(0) = NAN;
  EXPECT_THROW(LstmStep(p, bad, LstmCellState::Zero(3)), NumericError);
}

TEST(CaptionModelTest, ZeroModelIsUniform) {
  for (int v : {5, 20}) {
    const auto m = ZeroCaptionModel(Words(v), 4, 3, 2);
    ModelState next;
    const std::vector<double> cond{0.5, -0.5};
    const Vector lp = ForwardStep(m, kStartSymbol, InitialModelState(m), cond, &next);
    for (int w = 0; w < v; ++w) EXPECT_DOUBLE_EQ(lp(w), -std::log(v));
    const std::vector<TokenId> seq{1, 2, 0, static_cast<TokenId>(m.vocab.eos())};
    EXPECT_NEAR(SequenceLoss(m, seq, cond), std::log(v), 1e-12);
  }
}

TEST(CaptionModelTest, EqualEmbeddingColumnsGiveEqualLogits) {
  auto m = RandomModel(6, 4, 3, 2, 10);
  m.embeddings.col(3) = m.embeddings.col(1);
  std::mt19937_64 rng(4);
  const auto cond = RandomVec(2, rng);
  ModelState s = InitialModelState(m), next;
  TokenId prev = kStartSymbol;
  for (TokenId y : {2, 1, 4, 3}) {
    const Vector lp = ForwardStep(m, prev, s, cond, &next);
    EXPECT_EQ(lp(1), lp(3));
    s = next;
    prev = y;
  }
}

TEST(CaptionModelTest, MatchesUnrolledForward) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = RandomModel(7, 5, 4, 3, seed);
    std::mt19937_64 rng(seed);
    const auto cond = RandomVec(3, rng);
    const std::vector<TokenId> seq{3, 1, 5, 2, static_cast<TokenId>(m.vocab.eos())};
    ModelState s = InitialModelState(m), next;
    TokenId prev = kStartSymbol;
    double stepped = 0.0;
    std::vector<double> picked;
    for (TokenId y : seq) {
      const Vector lp = ForwardStep(m, prev, s, cond, &next);
      EXPECT_NEAR(lp.array().exp().sum(), 1.0, 1e-6);
      stepped += lp(y);
      picked.push_back(lp(y));
      s = next;
      prev = y;
    }
    EXPECT_NEAR(stepped, UnrolledLogProb(m, seq, cond), 1e-10);
    double mean = 0.0;
    for (double x : picked) mean -= x;
    mean /= static_cast<double>(picked.size());
    EXPECT_NEAR(SequenceLoss(m, seq, cond), mean, 1e-12);
    // Adding a constant to every logit leaves the loss alone.
    EXPECT_NEAR(SequenceLoss(m, seq, cond, 7.5), SequenceLoss(m, seq, cond), 1e-12);

    const CaptionModelScorer scorer(std::make_shared<const CaptionModelParams>(m));
    EXPECT_NEAR(SequenceLogProb(scorer, seq, cond), stepped, 1e-12);
  }
}

TEST(CaptionModelTest, ForwardErrors) {
  const auto m = RandomModel(5, 4, 3, 2, 1);
  ModelState next;
  const std::vector<double> cond{0.1, 0.2};
  EXPECT_THROW(ForwardStep(m, 5, InitialModelState(m), cond, &next),
               ContractViolation);
  const std::vector<double> short_cond{0.1};
  EXPECT_THROW(ForwardStep(m, 0, InitialModelState(m), short_cond, &next),
               ContractViolation);
}

double MaxGradientError(const CaptionModelParams& model,
                        const std::vector<TrainingExample>& batch) {
  const auto check = testing::CheckGradients(model, batch);
  EXPECT_LT(check.max_absolute_small, 1e-10);
  EXPECT_GT(check.checked, 0u);
  return check.max_relative;
}

TEST(GradientTest, FiniteDifferencesSmallModel) {
  const auto m = RandomModel(5, 4, 3, 2, 21);
  std::mt19937_64 rng(3);
  const std::vector<TrainingExample> batch{
      {{1, 3, 2, static_cast<TokenId>(m.vocab.eos())}, RandomVec(2, rng)}};
  EXPECT_LT(MaxGradientError(m, batch), 1e-4);
}

TEST(GradientTest, FiniteDifferencesSweep) {
  std::mt19937_64 rng(8);
  const int shapes[][3] = {{3, 2, 5}, {8, 8, 20}, {3, 8, 5}, {8, 2, 20}, {3, 2, 20}};
  for (std::size_t k = 0; k < 5; ++k) {
    const auto [n, f, v] = shapes[k];
    const auto m = RandomModel(v, 4, n, f, 100 + k);
    std::uniform_int_distribution<TokenId> tok(0, v - 1);
    std::vector<TrainingExample> batch;
    for (int b = 0; b < 2; ++b) {
      std::vector<TokenId> seq{tok(rng), tok(rng), tok(rng)};
      seq.push_back(m.vocab.eos());
      batch.push_back({seq, RandomVec(f, rng)});
    }
    EXPECT_LT(MaxGradientError(m, batch), 1e-4) << "shape " << k;
  }
}

TEST(GradientTest, DuplicatedSequenceKeepsMean) {
  const auto m = RandomModel(6, 4, 3, 2, 5);
  const std::vector<TrainingExample> one{{{1, 2, 5}, {0.3, -0.2}}};
  const std::vector<TrainingExample> two{one[0], one[0]};
  const auto g1 = ComputeGradients(m, one), g2 = ComputeGradients(m, two);
  std::vector<double> a, b;
  VisitTrainable(g1, [&](const std::string&, const auto& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) a.push_back(x.data()[k]);
  });
  VisitTrainable(g2, [&](const std::string&, const auto& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) b.push_back(x.data()[k]);
  });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

std::vector<TrainingExample> PatternCorpus(const Vocabulary& vocab) {
  const std::vector<std::vector<std::string>> sentences{
      {"a", "man", "rides", "a", "horse"}, {"a", "dog", "sees", "a", "cat"}};
  std::vector<TrainingExample> corpus;
  for (int k = 0; k < 20; ++k) {
    auto ids = vocab.Encode(sentences[k % 5 == 4]);
    ids.push_back(vocab.eos());
    corpus.push_back({ids, {1.0, 0.0}});
  }
  return corpus;
}

TEST(TrainTest, LearnsMajorityPattern) {
  const Vocabulary vocab({"a", "man", "rides", "horse", "dog", "sees", "cat"});
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix emb(8, vocab.size());
  for (Eigen::Index k = 0; k < emb.size(); ++k) emb.data()[k] = normal(rng);
  const auto model = InitCaptionModel(vocab, emb, 16, 2, 3);
  const auto corpus = PatternCorpus(vocab);
  TrainOptions opts;
  opts.epochs = 60;
  opts.learning_rate = 0.5;
  opts.batch_size = 5;
  const auto result = Train(model, corpus, opts);
  ASSERT_EQ(result.epoch_losses.size(), 60u);
  EXPECT_LT(result.epoch_losses.back(), 0.5 * result.epoch_losses.front());
  EXPECT_EQ(result.model.embeddings, model.embeddings);
  EXPECT_EQ(result.model.start_embedding, model.start_embedding);

  const CaptionModelScorer scorer(
      std::make_shared<const CaptionModelParams>(result.model));
  SearchParams p;
  p.beam_size = 1;
  p.max_len = 10;
  p.no_repeat = false;
  const std::vector<double> cond{1.0, 0.0};
  const auto best = BeamSearch(scorer, vocab, p, cond);
  ASSERT_TRUE(best);
  EXPECT_EQ(vocab.Decode(best->tokens), "a man rides a horse <eos>");
}

TEST(TrainTest, ZeroLearningRateChangesNothing) {
  const auto model = RandomModel(6, 4, 3, 2, 7);
  const std::vector<TrainingExample> corpus{{{1, 2, 5}, {0.3, -0.2}},
                                            {{3, 5}, {0.1, 0.9}}};
  TrainOptions opts;
  opts.epochs = 4;
  opts.learning_rate = 0.0;
  const auto result = Train(model, corpus, opts);
  for (double l : result.epoch_losses) EXPECT_EQ(l, result.epoch_losses.front());
  VisitTrainable(result.model, [&](const std::string& name, const auto& block) {
    bool same = false;
    VisitTrainable(model, [&](const std::string& other, const auto& orig) {
      if (other == name) same = block == orig;
    });
    EXPECT_TRUE(same) << name;
  });
}

TEST(TrainTest, SameSeedSameCurve) {
  const auto model = RandomModel(6, 4, 3, 2, 7);
  std::vector<TrainingExample> corpus;
  for (int k = 0; k < 7; ++k) corpus.push_back({{k % 5, (k + 1) % 5, 5}, {0.1 * k, 1.0}});
  TrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 3;
  opts.seed = 99;
  EXPECT_EQ(Train(model, corpus, opts).epoch_losses,
            Train(model, corpus, opts).epoch_losses);
}

TEST(CheckpointTest, RoundTrip) {
  const auto model = RandomModel(6, 4, 3, 2, 7);
  const auto path = std::filesystem::temp_directory_path() / "cbs_ckpt_test.bin";
  SaveCheckpoint(model, path.string());
  const auto back = LoadCheckpoint(path.string());
  EXPECT_EQ(back.vocab, model.vocab);
  EXPECT_EQ(back.embeddings, model.embeddings);
  EXPECT_EQ(back.start_embedding, model.start_embedding);
  VisitTrainable(back, [&](const std::string& name, const auto& block) {
    VisitTrainable(model, [&](const std::string& other, const auto& orig) {
      if (other == name) EXPECT_TRUE(block == orig) << name;
    });
  });
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/ckpt.bin"), Error);
}

}  // namespace
}  // namespace cbs::nn
