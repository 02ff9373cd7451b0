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

#include "cbs/text.h"

#include <gtest/gtest.h>

#include "cbs/errors.h"
#include "cbs/vocabulary.h"

namespace cbs {
namespace {

using Words = std::vector<std::string>;

TEST(TokenizeTest, LowercasesAndSplits) {
  EXPECT_EQ(Tokenize("A Man on a Bus"), (Words{"a", "man", "on", "a", "bus"}));
  EXPECT_EQ(Tokenize("  a\t b "), (Words{"a", "b"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize(" \t\r\n").empty());
  // No-break space and ideographic space count as whitespace.
  EXPECT_EQ(Tokenize("x\u00a0y\u3000Z"), (Words{"x", "y", "z"}));
  EXPECT_EQ(Tokenize("\u00c9T\u00c9 \u0394\u0395"),
            (Words{"\u00e9t\u00e9", "\u03b4\u03b5"}));
  EXPECT_EQ(Tokenize("don't, stop."), (Words{"don't,", "stop."}));
}

TEST(TokenizeTest, CorpusRoundTrip) {
  const std::string text = "A man  riding\ta HORSE\n\nThe dog   on a bus \n";
  const auto corpus = ParseCorpus(text);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(Join(corpus[0]), "a man riding a horse");
  EXPECT_EQ(Join(corpus[1]), "the dog on a bus");
  for (const auto& s : corpus) EXPECT_EQ(Tokenize(Join(s)), s);
}

TEST(VocabularyTest, Basics) {
  Vocabulary v({"a", "b"});
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.Word(v.eos()), "<eos>");
  EXPECT_EQ(v.Id("b"), 1);
  EXPECT_FALSE(v.Find("zzz"));
  EXPECT_THROW(v.Id("zzz"), ConstraintError);
  EXPECT_THROW(v.Word(3), ContractViolation);
  EXPECT_EQ(v.Add("c"), 3);
  EXPECT_THROW(v.Add("a"), DataError);
  EXPECT_THROW(Vocabulary({"a", "a"}), DataError);
  const std::vector<Words> sentences{{"x", "y"}, {"y", "z"}};
  const auto fs = Vocabulary::FromSentences(sentences);
  EXPECT_EQ(fs.tokens(), (Words{"<eos>", "x", "y", "z"}));
  EXPECT_EQ(fs.eos(), 0);
}

TEST(FileTest, MissingFile) {
  EXPECT_THROW(ReadFile("/nonexistent/file.txt"), DataError);
}

}  // namespace
}  // namespace cbs
