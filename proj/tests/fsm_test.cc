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

#include <random>

#include <gtest/gtest.h>

#include "cbs/errors.h"
#include "test_util.h"

namespace cbs {
namespace {

using testing::ContainsSubsequence;
using testing::ForEachSequence;
using testing::SatisfiesDisjunctions;

// Chair/table machine: C1 = {chair, chairs}, C2 = {desk, table}.
struct ChairTable {
  Vocabulary vocab{{"a", "the", "chair", "chairs", "desk", "table", "near",
                    "and"}};
  Fsm fsm = CompileDisjunctions(
      {{{vocab.Id("chair"), vocab.Id("chairs")},
        {vocab.Id("desk"), vocab.Id("table")}}},
      vocab.size());
  std::vector<TokenId> Enc(const std::string& s) const {
    std::vector<TokenId> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
      auto end = s.find(' ', pos);
      if (end == std::string::npos) end = s.size();
      out.push_back(vocab.Id(s.substr(pos, end - pos)));
      pos = end + 1;
    }
    return out;
  }
};

TEST(CompileDisjunctionsTest, ChairTableMachine) {
  ChairTable ct;
  EXPECT_EQ(ct.fsm.num_states(), 4u);
  EXPECT_EQ(ct.fsm.start(), 0);
  EXPECT_EQ(ct.fsm.AcceptingStates(), std::vector<StateId>{3});
  EXPECT_EQ(ct.fsm.Step(0, ct.vocab.Id("chair")), 1);
  EXPECT_EQ(ct.fsm.Step(1, ct.vocab.Id("table")), 3);
  EXPECT_EQ(ct.fsm.Step(0, ct.vocab.Id("chairs")), 1);
  EXPECT_EQ(ct.fsm.Step(0, ct.vocab.Id("desk")), 2);
  EXPECT_EQ(ct.fsm.Step(0, ct.vocab.Id("a")), 0);
  EXPECT_EQ(ct.fsm.Step(3, ct.vocab.Id("a")), 3);
  EXPECT_EQ(ct.fsm.progress(0), 0);
  EXPECT_EQ(ct.fsm.progress(3), 2);
}

TEST(CompileDisjunctionsTest, ChainedStepsMatchRecognizes) {
  ChairTable ct;
  const auto seq = ct.Enc("the chair near the table");
  StateId s = ct.fsm.start();
  for (TokenId w : seq) s = ct.fsm.Step(s, w);
  EXPECT_EQ(s, 3);
  EXPECT_EQ(cbs::Run(ct.fsm, seq), 3);
  EXPECT_TRUE(Recognizes(ct.fsm, seq));
}

TEST(RecognizesTest, ChairTableSemantics) {
  ChairTable ct;
  EXPECT_TRUE(Recognizes(ct.fsm, ct.Enc("a table and a chair")));
  EXPECT_FALSE(Recognizes(ct.fsm, ct.Enc("a table")));
  EXPECT_FALSE(Recognizes(ct.fsm, {}));
}

TEST(CompileDisjunctionsTest, StateCountIsTwoToTheM) {
  for (std::size_t m = 0; m <= 6; ++m) {
    DisjunctiveConstraints c;
    for (std::size_t k = 0; k < m; ++k) {
      c.disjunctions.push_back({static_cast<TokenId>(k)});
    }
    EXPECT_EQ(CompileDisjunctions(c, 8).num_states(), std::size_t{1} << m);
  }
}

TEST(CompileDisjunctionsTest, ThreeSingletonsMatchMembershipOracle) {
  const DisjunctiveConstraints c{{{0}, {2}, {4}}};
  const Fsm fsm = CompileDisjunctions(c, 5);
  ASSERT_EQ(fsm.num_states(), 8u);
  int accepted = 0;
  ForEachSequence(5, 4, [&](const std::vector<TokenId>& seq) {
    const bool want = SatisfiesDisjunctions(seq, c);
    EXPECT_EQ(Recognizes(fsm, seq), want);
    accepted += want;
  });
  EXPECT_GT(accepted, 0);
}

TEST(CompileDisjunctionsTest, OverlappingSetsSetBothBits) {
  const Fsm fsm = CompileDisjunctions({{{0, 1}, {1, 2}}}, 4);
  EXPECT_EQ(fsm.Step(0, 1), 3);
  EXPECT_TRUE(Recognizes(fsm, std::vector<TokenId>{1}));
}

TEST(CompileDisjunctionsTest, BitsNeverClear) {
  const DisjunctiveConstraints c{{{0}, {1}, {2}}};
  const Fsm fsm = CompileDisjunctions(c, 4);
  for (StateId s = 0; s < 8; ++s) {
    for (TokenId w = 0; w < 4; ++w) {
      EXPECT_EQ(fsm.Step(s, w) & s, s);
    }
  }
}

TEST(CompileDisjunctionsTest, Errors) {
  EXPECT_THROW(CompileDisjunctions({{{}}}, 4), ConstraintError);
  EXPECT_THROW(CompileDisjunctions({{{7}}}, 4), ConstraintError);
  DisjunctiveConstraints many;
  for (int k = 0; k < 17; ++k) many.disjunctions.push_back({0});
  EXPECT_THROW(CompileDisjunctions(many, 4), CapacityError);
  EXPECT_THROW(CompileDisjunctions({{{0}, {1}, {2}}}, 4, 2), CapacityError);
}

TEST(CompilePhraseTest, StateCountIsLengthPlusOne) {
  for (int len = 1; len <= 8; ++len) {
    PhraseConstraint p;
    for (int k = 0; k < len; ++k) p.tokens.push_back(k % 3);
    EXPECT_EQ(CompilePhrase(p, 4).num_states(), static_cast<std::size_t>(len) + 1);
  }
}

TEST(CompilePhraseTest, TwoWordPhraseHasThreeStates) {
  const Vocabulary vocab({"pool", "billiard", "snooker", "table"});
  const Fsm fsm = CompilePhrase({{vocab.Id("billiard"), vocab.Id("table")}},
                                vocab.size());
  EXPECT_EQ(fsm.num_states(), 3u);
  EXPECT_EQ(fsm.AcceptingStates(), std::vector<StateId>{2});
}

TEST(CompilePhraseTest, FailureFunctionKeepsLongestSuffix) {
  // a = 0, b = 1.
  const Fsm fsm = CompilePhrase({{0, 0, 1}}, 2);
  StateId s = fsm.start();
  s = fsm.Step(s, 0);
  s = fsm.Step(s, 0);
  s = fsm.Step(s, 0);
  EXPECT_EQ(s, 2);
  EXPECT_TRUE(Recognizes(fsm, std::vector<TokenId>{0, 0, 0, 1}));
  ForEachSequence(2, 6, [&](const std::vector<TokenId>& seq) {
    EXPECT_EQ(Recognizes(fsm, seq), ContainsSubsequence(seq, {0, 0, 1}));
  });
}

TEST(CompilePhraseTest, MatchesSubstringSearchExhaustively) {
  std::vector<std::vector<TokenId>> phrases;
  ForEachSequence(3, 3, [&](const std::vector<TokenId>& p) {
    if (!p.empty()) phrases.push_back(p);
  });
  for (const auto& phrase : phrases) {
    const Fsm fsm = CompilePhrase({phrase}, 3);
    ForEachSequence(3, 6, [&](const std::vector<TokenId>& seq) {
      ASSERT_EQ(Recognizes(fsm, seq), ContainsSubsequence(seq, phrase));
    });
  }
}

TEST(CompilePhraseTest, FinalStateIsAbsorbing) {
  const Fsm fsm = CompilePhrase({{1, 2}}, 4);
  for (TokenId w = 0; w < 4; ++w) EXPECT_EQ(fsm.Step(2, w), 2);
}

TEST(CompilePhraseTest, Errors) {
  EXPECT_THROW(CompilePhrase({{}}, 3), ConstraintError);
  EXPECT_THROW(CompilePhrase({{0, 3}}, 3), ConstraintError);
}

TEST(IntersectTest, PhraseAndDisjunction) {
  // a = 0, b = 1, c = 2, d = 3.
  const Fsm fsm = Intersect(CompilePhrase({{0, 1}}, 4),
                            CompileDisjunctions({{{2}}}, 4));
  EXPECT_TRUE(Recognizes(fsm, std::vector<TokenId>{0, 1, 2}));
  EXPECT_TRUE(Recognizes(fsm, std::vector<TokenId>{2, 0, 1}));
  EXPECT_FALSE(Recognizes(fsm, std::vector<TokenId>{0, 2, 1}));
  ForEachSequence(4, 4, [&](const std::vector<TokenId>& seq) {
    const bool want = ContainsSubsequence(seq, {0, 1}) &&
                      ContainsSubsequence(seq, {2});
    ASSERT_EQ(Recognizes(fsm, seq), want);
  });
}

TEST(IntersectTest, TwoPhrasesRequireBoth) {
  const Fsm fsm = Intersect(CompilePhrase({{0}}, 3), CompilePhrase({{1}}, 3));
  ForEachSequence(3, 5, [&](const std::vector<TokenId>& seq) {
    ASSERT_EQ(Recognizes(fsm, seq),
              ContainsSubsequence(seq, {0}) && ContainsSubsequence(seq, {1}));
  });
}

TEST(IntersectTest, ProgressAddsAndCapApplies) {
  const Fsm a = CompileDisjunctions({{{0}, {1}}}, 4);
  const Fsm b = CompilePhrase({{2, 3}}, 4);
  const Fsm p = Intersect(a, b);
  const StateId s = cbs::Run(p, std::vector<TokenId>{0, 1, 2, 3});
  EXPECT_TRUE(p.accepting(s));
  EXPECT_EQ(p.progress(s), 4);
  EXPECT_THROW(Intersect(a, b, 3), CapacityError);
  EXPECT_THROW(Intersect(a, CompilePhrase({{0}}, 5)), ContractViolation);
}

TEST(RecognizesTest, RandomSequencesAgreeWithDirectChecks) {
  std::mt19937_64 rng(7);
  const int v = 6;
  const DisjunctiveConstraints c{{{0, 1}, {3}}};
  const std::vector<TokenId> phrase{4, 2};
  const Fsm fsm = Intersect(CompileDisjunctions(c, v), CompilePhrase({phrase}, v));
  std::uniform_int_distribution<int> len(0, 12), tok(0, v - 1);
  for (int k = 0; k < 1000; ++k) {
    std::vector<TokenId> seq(len(rng));
    for (auto& t : seq) t = tok(rng);
    ASSERT_EQ(Recognizes(fsm, seq),
              SatisfiesDisjunctions(seq, c) && ContainsSubsequence(seq, phrase));
  }
}

TEST(FsmTest, StepRejectsOutOfRange) {
  const Fsm fsm = Fsm::AcceptAll(3);
  EXPECT_THROW(fsm.Step(0, 3), ContractViolation);
  EXPECT_THROW(fsm.Step(1, 0), ContractViolation);
  EXPECT_THROW(fsm.Step(0, -1), ContractViolation);
}

TEST(FsmTest, ConstructorNormalizes) {
  std::vector<FsmState> states(2);
  states[0].transitions = {{2, 1}, {1, 0}, {0, 1}};
  states[1].accepting = true;
  states[1].default_target = 1;
  const Fsm fsm(3, states, 0);
  ASSERT_EQ(fsm.transitions(0).size(), 2u);
  EXPECT_EQ(fsm.transitions(0)[0].token, 0);
  EXPECT_EQ(fsm.transitions(0)[1].token, 2);

  std::vector<FsmState> dup(1);
  dup[0].transitions = {{1, 0}, {1, 0}};
  EXPECT_THROW(Fsm(3, dup, 0), ContractViolation);
  EXPECT_THROW(Fsm(3, std::vector<FsmState>(1), 1), ContractViolation);
}

TEST(FsmJsonTest, RoundTrip) {
  ChairTable ct;
  const Fsm fsm = Intersect(ct.fsm, CompilePhrase({ct.Enc("a chair")}, ct.vocab.size()));
  const std::string dump = DumpFsmJson(fsm, ct.vocab);
  EXPECT_EQ(ParseFsmJson(dump, ct.vocab), fsm);
  EXPECT_EQ(DumpFsmJson(ParseFsmJson(dump, ct.vocab), ct.vocab), dump);
}

}  // namespace
}  // namespace cbs
