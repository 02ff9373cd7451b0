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

#ifndef CBS_EVAL_H_
#define CBS_EVAL_H_

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/beam_search.h"
#include "cbs/fsm.h"

namespace cbs {

// Words that count as a mention of `object`, e.g. its plural and synonyms.
struct MentionSpec {
  std::string object;
  std::set<std::string> mentions;
};

MentionSpec ParseMentionSpec(std::string_view json_text);
// Either one spec object or an array of them.
std::vector<MentionSpec> ParseMentionSpecs(std::string_view json_text);

struct EvalPair {
  std::vector<std::string> generated;
  std::vector<std::vector<std::string>> references;
};

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  // Set when a denominator was zero and the affected value defaulted to 0.
  bool degenerate = false;
};

// A caption is predicted positive when it contains at least one mention;
// an image is truly positive when any of its references does. Throws
// DataError for an empty mention set or pair list.
F1Score F1Mentions(std::span<const EvalPair> pairs, const MentionSpec& spec);

struct ObjectF1 {
  std::string object;
  F1Score score;
};

struct F1Report {
  std::vector<ObjectF1> per_object;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Per-object scores and their unweighted means.
F1Report MacroF1(std::span<const EvalPair> pairs,
                 std::span<const MentionSpec> specs);
std::string F1ReportToJson(const F1Report& report);

// Fraction of results whose tokens the paired FSM accepts, whatever their
// reported status. Results without a hypothesis count as unsatisfied.
// Throws DataError when the lists are empty or differ in length.
double SatisfactionRate(std::span<const DecodeResult> results,
                        std::span<const Fsm> fsms);

}  // namespace cbs

#endif  // CBS_EVAL_H_
