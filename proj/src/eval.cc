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

#include "cbs/eval.h"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cbs/errors.h"
#include "cbs/text.h"

namespace cbs {

using nlohmann::json;

namespace {

MentionSpec SpecFromJson(const json& in) {
  MentionSpec spec;
  spec.object = ToLower(in.at("object").get<std::string>());
  for (const auto& m : in.at("mentions")) {
    spec.mentions.insert(ToLower(m.get<std::string>()));
  }
  if (spec.mentions.empty()) {
    throw DataError("mention set for \"" + spec.object + "\" is empty");
  }
  return spec;
}

bool Mentions(const std::vector<std::string>& caption, const MentionSpec& spec) {
  return std::any_of(caption.begin(), caption.end(), [&](const std::string& w) {
    return spec.mentions.count(w) > 0;
  });
}

json ScoreJson(const F1Score& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"tp", s.true_positives},
          {"fp", s.false_positives},
          {"fn", s.false_negatives},
          {"tn", s.true_negatives},
          {"degenerate", s.degenerate}};
}

}  // namespace

MentionSpec ParseMentionSpec(std::string_view json_text) {
  try {
    return SpecFromJson(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("mention spec: ") + e.what());
  }
}

std::vector<MentionSpec> ParseMentionSpecs(std::string_view json_text) {
  try {
    const json in = json::parse(json_text);
    std::vector<MentionSpec> out;
    if (in.is_array()) {
      for (const auto& s : in) out.push_back(SpecFromJson(s));
    } else {
      out.push_back(SpecFromJson(in));
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("mention spec: ") + e.what());
  }
}

F1Score F1Mentions(std::span<const EvalPair> pairs, const MentionSpec& spec) {
  if (spec.mentions.empty()) throw DataError("empty mention set");
  if (pairs.empty()) throw DataError("no caption pairs to evaluate");
  F1Score s;
  for (const auto& pair : pairs) {
    const bool predicted = Mentions(pair.generated, spec);
    const bool actual =
        std::any_of(pair.references.begin(), pair.references.end(),
                    [&](const auto& ref) { return Mentions(ref, spec); });
    if (predicted && actual) ++s.true_positives;
    if (predicted && !actual) ++s.false_positives;
    if (!predicted && actual) ++s.false_negatives;
    if (!predicted && !actual) ++s.true_negatives;
  }
  const double tp = static_cast<double>(s.true_positives);
  const double predicted = tp + static_cast<double>(s.false_positives);
  const double actual = tp + static_cast<double>(s.false_negatives);
  if (predicted > 0) s.precision = tp / predicted; else s.degenerate = true;
  if (actual > 0) s.recall = tp / actual; else s.degenerate = true;
  if (s.precision + s.recall > 0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  } else {
    s.degenerate = true;
  }
  return s;
}

F1Report MacroF1(std::span<const EvalPair> pairs,
                 std::span<const MentionSpec> specs) {
  if (specs.empty()) throw DataError("no mention specs");
  F1Report report;
  for (const auto& spec : specs) {
    report.per_object.push_back({spec.object, F1Mentions(pairs, spec)});
    const auto& s = report.per_object.back().score;
    report.macro_precision += s.precision;
    report.macro_recall += s.recall;
    report.macro_f1 += s.f1;
  }
  const double n = static_cast<double>(specs.size());
  report.macro_precision /= n;
  report.macro_recall /= n;
  report.macro_f1 /= n;
  return report;
}

std::string F1ReportToJson(const F1Report& report) {
  json objects = json::array();
  for (const auto& o : report.per_object) {
    json entry = ScoreJson(o.score);
    entry["object"] = o.object;
    objects.push_back(std::move(entry));
  }
  return json{{"per_object", std::move(objects)},
              {"macro", {{"precision", report.macro_precision},
                         {"recall", report.macro_recall},
                         {"f1", report.macro_f1}}}}
      .dump(2);
}

double SatisfactionRate(std::span<const DecodeResult> results,
                        std::span<const Fsm> fsms) {
  if (results.empty()) throw DataError("no decode results");
  if (results.size() != fsms.size()) {
    throw DataError("got " + std::to_string(results.size()) + " results and " +
                    std::to_string(fsms.size()) + " machines");
  }
  std::size_t satisfied = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k].best && Recognizes(fsms[k], results[k].best->tokens)) {
      ++satisfied;
    }
  }
  return static_cast<double>(satisfied) / static_cast<double>(results.size());
}

}  // namespace cbs
