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

#include "cbs/embeddings.h"

#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "cbs/beam_search.h"
#include "cbs/constraints.h"
#include "cbs/errors.h"
#include "cbs/ngram.h"

namespace cbs {
namespace {

namespace fs = std::filesystem;

EmbeddingTable RandomTable(int words, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  EmbeddingTable t;
  t.dim = dim;
  for (int k = 0; k < words; ++k) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    t.vectors.emplace("w" + std::to_string(k), std::move(v));
  }
  return t;
}

nn::CaptionModelParams ToyModel(std::uint64_t seed) {
  const Vocabulary vocab({"a", "man", "holding", "tennis", "on", "court"});
  const auto table = RandomTable(1, 6, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Matrix emb(6, vocab.size());
  for (Eigen::Index k = 0; k < emb.size(); ++k) emb.data()[k] = normal(rng);
  auto m = nn::InitCaptionModel(vocab, emb, 5, 2, seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  nn::VisitTrainable(m, [&](const std::string&, auto& block) {
    for (Eigen::Index k = 0; k < block.size(); ++k) block.data()[k] = u(rng);
  });
  return m;
}

TEST(EmbeddingsTest, ParseKeepsNeededAndReportsMissing) {
  const std::set<std::string> needed{"cat", "dog"};
  const auto loaded = ParseEmbeddings("Cat 0.1 0.2 0.3\nbus 1 2 3\n", &needed, 3);
  EXPECT_EQ(loaded.table.vectors.size(), 1u);
  ASSERT_TRUE(loaded.table.Find("cat"));
  EXPECT_EQ(*loaded.table.Find("cat"), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(loaded.missing, std::vector<std::string>{"dog"});
}

TEST(EmbeddingsTest, MalformedLineReportsLineNumber) {
  try {
    ParseEmbeddings("a 1 2\nb 1\n", nullptr, 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(ParseEmbeddings("a 1 x\n", nullptr, 2), ParseError);
  EXPECT_EQ(ParseEmbeddings("a 1 2 3\n", nullptr, 0).table.dim, 3u);
}

TEST(EmbeddingsTest, FileRoundTrip) {
  const auto table = RandomTable(50, 300, 1);
  const auto path = fs::temp_directory_path() / "cbs_emb_roundtrip.txt";
  SaveEmbeddings(table, path.string());
  const auto back = LoadEmbeddings(path.string());
  fs::remove(path);
  ASSERT_EQ(back.table.vectors.size(), 50u);
  for (const auto& [word, vec] : table.vectors) {
    const auto* got = back.table.Find(word);
    ASSERT_TRUE(got);
    for (std::size_t k = 0; k < vec.size(); ++k) {
      ASSERT_NEAR((*got)[k], vec[k], 1e-12);
    }
  }
}

TEST(ExpandVocabTest, PreservesExistingLogits) {
  const auto model = ToyModel(3);
  const std::vector<double> vec{0.5, -0.1, 0.2, 0.9, -0.4, 0.3};
  const auto expanded = ExpandVocab(model, "racket", vec, 0);
  EXPECT_EQ(expanded.record.id, static_cast<TokenId>(model.vocab.size()));
  EXPECT_EQ(expanded.model.vocab.size(), model.vocab.size() + 1);
  EXPECT_EQ(expanded.model.vocab.Word(expanded.record.id), "racket");
  EXPECT_EQ(expanded.model.projection, model.projection);

  const std::vector<double> cond{0.2, -0.7};
  nn::ModelState s_old = nn::InitialModelState(model), s_new = s_old, next;
  TokenId prev = kStartSymbol;
  const auto n = static_cast<Eigen::Index>(model.vocab.size());
  for (TokenId y : {0, 1, 2, 3}) {
    nn::ForwardCache c_old, c_new;
    const nn::Vector lp_old = nn::ForwardStep(model, prev, s_old, cond, &next, &c_old);
    s_old = next;
    const nn::Vector lp_new =
        nn::ForwardStep(expanded.model, prev, s_new, cond, &next, &c_new);
    s_new = next;
    const nn::Vector l_old = nn::TiedLogits(model.embeddings, c_old.projected);
    const nn::Vector l_new = nn::TiedLogits(expanded.model.embeddings, c_new.projected);
    for (Eigen::Index w = 0; w < n; ++w) ASSERT_EQ(l_old(w), l_new(w));
    // Every old probability shrinks by the same factor.
    const double shift = lp_new(0) - lp_old(0);
    for (Eigen::Index w = 0; w < n; ++w) {
      EXPECT_NEAR(lp_new(w) - lp_old(w), shift, 1e-12);
    }
    prev = y;
  }
}

TEST(ExpandVocabTest, ZeroVectorHasZeroLogit) {
  const auto model = ToyModel(4);
  const auto expanded = ExpandVocab(model, "zero", std::vector<double>(6, 0.0));
  nn::ModelState next;
  nn::ForwardCache cache;
  const std::vector<double> cond{0.1, 0.1};
  nn::ForwardStep(expanded.model, kStartSymbol,
                  nn::InitialModelState(expanded.model), cond, &next, &cache);
  EXPECT_EQ(nn::TiedLogits(expanded.model.embeddings, cache.projected)(
                expanded.record.id),
            0.0);
}

TEST(ExpandVocabTest, OrderInsensitive) {
  const auto model = ToyModel(5);
  const std::vector<double> u{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<double> v{-0.3, 0.1, 0.0, 0.8, -0.2, 0.4};
  const auto uv = ExpandVocab(ExpandVocab(model, "u", u).model, "v", v, 1).model;
  const auto vu = ExpandVocab(ExpandVocab(model, "v", v).model, "u", u, 1).model;
  nn::ModelState next;
  nn::ForwardCache a, b;
  const std::vector<double> cond{0.4, 0.4};
  nn::ForwardStep(uv, kStartSymbol, nn::InitialModelState(uv), cond, &next, &a);
  nn::ForwardStep(vu, kStartSymbol, nn::InitialModelState(vu), cond, &next, &b);
  const nn::Vector la = nn::TiedLogits(uv.embeddings, a.projected);
  const nn::Vector lb = nn::TiedLogits(vu.embeddings, b.projected);
  for (std::size_t w = 0; w < model.vocab.size(); ++w) EXPECT_EQ(la(w), lb(w));
  EXPECT_EQ(la(uv.vocab.Id("u")), lb(vu.vocab.Id("u")));
}

TEST(ExpandVocabTest, Errors) {
  const auto model = ToyModel(6);
  EXPECT_THROW(ExpandVocab(model, "man", std::vector<double>(6, 0.0)), DataError);
  EXPECT_THROW(ExpandVocab(model, "new", std::vector<double>(5, 0.0)),
               ContractViolation);
  std::vector<double> nan(6, 0.0);
  nan[2] = NAN;
  EXPECT_THROW(ExpandVocab(model, "new", nan), ContractViolation);
}

TEST(ExpandVocabTest, ConstrainedDecodeOfNewWord) {
  auto model = ToyModel(7);
  const auto spec = ParseConstraintSpec(R"({"disjunctions": [["racket"]]})");
  EXPECT_THROW(CompileConstraintSpec(spec, model.vocab), ConstraintError);
  EXPECT_EQ(UnknownWords(spec, model.vocab), std::vector<std::string>{"racket"});

  EmbeddingTable table;
  table.dim = 6;
  table.vectors["racket"] = {0.3, -0.2, 0.1, 0.4, 0.0, -0.5};
  const std::vector<std::string> words{"racket"};
  const auto records = ApplyExpansions(&model, words, table);
  ASSERT_EQ(records.size(), 1u);
  const Fsm fsm = CompileConstraintSpec(spec, model.vocab);
  const nn::CaptionModelScorer scorer(
      std::make_shared<const nn::CaptionModelParams>(model));
  SearchParams p;
  p.max_len = 8;
  const std::vector<double> cond{0.0, 1.0};
  const auto r = ConstrainedBeamSearch(scorer, fsm, model.vocab, p, cond);
  ASSERT_EQ(r.status, DecodeStatus::kAccepted);
  EXPECT_TRUE(Recognizes(fsm, r.best->tokens));
  EXPECT_NE(std::find(r.best->tokens.begin(), r.best->tokens.end(),
                      model.vocab.Id("racket")),
            r.best->tokens.end());
}

TEST(ManifestTest, ParseAndApply) {
  const auto entries = ParseExpansionManifest(
      R"([{"word": "Racket", "source": "embedding-file"}, {"word": "court"}])");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].word, "racket");
  EXPECT_THROW(ParseExpansionManifest(R"([{"word": "x", "source": "random"}])"),
               ParseError);
  auto model = ToyModel(8);
  EmbeddingTable table;
  table.dim = 6;
  const std::vector<std::string> words{"racket", "court", "zebra"};
  EXPECT_THROW(ApplyExpansions(&model, words, table), DataError);
  table.vectors["racket"] = std::vector<double>(6, 0.1);
  table.vectors["zebra"] = std::vector<double>(6, 0.2);
  const auto records = ApplyExpansions(&model, words, table);
  // "court" is already known and is skipped.
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].word, "racket");
  EXPECT_EQ(records[1].order, 1u);
  EXPECT_EQ(records[1].id, records[0].id + 1);
}

TEST(NeighborsTest, SelfAndDuplicate) {
  auto table = RandomTable(10, 8, 2);
  table.vectors["copy"] = table.vectors.at("w3");
  const auto* v = table.Find("w3");
  EXPECT_NEAR(CosineSimilarity(*v, *v), 1.0, 1e-15);
  const auto nn = NearestNeighbors(table, "w3", 3);
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_EQ(nn[0].word, "copy");
  EXPECT_NEAR(nn[0].similarity, 1.0, 1e-15);
  for (const auto& n : nn) EXPECT_NE(n.word, "w3");
  EXPECT_THROW(NearestNeighbors(table, "nope", 3), DataError);
}

TEST(NeighborsTest, MatchesFullSort) {
  const auto table = RandomTable(20, 16, 9);
  for (const auto& [query, qv] : table.vectors) {
    std::vector<Neighbor> all;
    for (const auto& [word, vec] : table.vectors) {
      if (word != query) all.push_back({word, CosineSimilarity(qv, vec)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity
                                          : a.word < b.word;
    });
    all.resize(5);
    const auto got = NearestNeighbors(table, query, 5);
    ASSERT_EQ(got.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_EQ(got[k].word, all[k].word);
      EXPECT_EQ(got[k].similarity, all[k].similarity);
    }
  }
}

}  // namespace
}  // namespace cbs
