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

#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbs/beam_search.h"
#include "cbs/caption_model.h"
#include "cbs/constraints.h"
#include "cbs/errors.h"
#include "cbs/eval.h"
#include "cbs/fsm.h"
#include "cbs/ngram.h"
#include "cbs/oracle.h"
#include "cbs/scorer.h"
#include "cbs/text.h"
#include "cbs/vocabulary.h"

namespace py = pybind11;

namespace cbs {
namespace {

SearchParams MakeParams(std::size_t beam_size, std::size_t max_len, bool no_repeat,
                        bool length_normalize) {
  SearchParams p;
  p.beam_size = beam_size;
  p.max_len = max_len;
  p.no_repeat = no_repeat;
  p.length_normalize = length_normalize;
  return p;
}

std::shared_ptr<NGramScorer> TrainNGram(const std::vector<std::vector<std::string>>& sentences,
                                        int order, double alpha) {
  if (sentences.empty()) throw DataError("corpus is empty");
  Vocabulary vocab = Vocabulary::FromSentences(sentences);
  std::vector<std::vector<TokenId>> corpus;
  for (const auto& s : sentences) {
    auto ids = vocab.Encode(s);
    ids.push_back(vocab.eos());
    corpus.push_back(std::move(ids));
  }
  return std::make_shared<NGramScorer>(std::make_shared<const NGramModel>(
      NGramModel::Train(corpus, std::move(vocab), order, alpha)));
}

}  // namespace
}  // namespace cbs

PYBIND11_MODULE(_core, m) {
  using namespace cbs;
  m.doc() = "Constrained beam search over finite-state machines.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConstraintError>(m, "ConstraintError", error);
  py::register_exception<CapacityError>(m, "CapacityError", error);
  py::register_exception<ContractViolation>(m, "ContractViolation", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<NumericError>(m, "NumericError", error);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<std::vector<std::string>>(), py::arg("tokens"))
      .def_static("from_sentences",
                  [](const std::vector<std::vector<std::string>>& s) {
                    return Vocabulary::FromSentences(s);
                  })
      .def("__len__", &Vocabulary::size)
      .def("__contains__", &Vocabulary::Contains)
      .def_property_readonly("eos", &Vocabulary::eos)
      .def_property_readonly("tokens", &Vocabulary::tokens)
      .def("id", &Vocabulary::Id)
      .def("word", &Vocabulary::Word)
      .def("encode", [](const Vocabulary& v, const std::vector<std::string>& w) {
        return v.Encode(w);
      })
      .def("decode", [](const Vocabulary& v, const std::vector<TokenId>& ids) {
        return v.Decode(ids);
      });

  py::class_<Fsm>(m, "Fsm")
      .def_static("accept_all", &Fsm::AcceptAll, py::arg("vocab_size"))
      .def_property_readonly("num_states", &Fsm::num_states)
      .def_property_readonly("vocab_size", &Fsm::vocab_size)
      .def_property_readonly("start", &Fsm::start)
      .def("step", &Fsm::Step)
      .def("accepting", &Fsm::accepting)
      .def("progress", &Fsm::progress)
      .def("accepting_states", &Fsm::AcceptingStates)
      .def("run", [](const Fsm& f, const std::vector<TokenId>& s) { return Run(f, s); })
      .def("recognizes",
           [](const Fsm& f, const std::vector<TokenId>& s) { return Recognizes(f, s); })
      .def("to_json", &DumpFsmJson, py::arg("vocab"))
      .def(py::self == py::self);

  m.def("compile_disjunctions",
        [](const std::vector<std::vector<TokenId>>& sets, std::size_t vocab_size) {
          return CompileDisjunctions({sets}, vocab_size);
        },
        py::arg("disjunctions"), py::arg("vocab_size"));
  m.def("compile_phrase",
        [](const std::vector<TokenId>& tokens, std::size_t vocab_size) {
          return CompilePhrase({tokens}, vocab_size);
        },
        py::arg("tokens"), py::arg("vocab_size"));
  m.def("intersect", [](const Fsm& a, const Fsm& b) { return Intersect(a, b); });
  m.def("compile_constraints",
        [](const std::string& json, const Vocabulary& vocab) {
          return CompileConstraintSpec(ParseConstraintSpec(json), vocab);
        },
        py::arg("spec_json"), py::arg("vocab"));
  m.def("compile_phrase_alternatives",
        [](const std::string& json, const Vocabulary& vocab) {
          return CompilePhraseAlternatives(ParseConstraintSpec(json), vocab);
        },
        py::arg("spec_json"), py::arg("vocab"));

  py::class_<Scorer, std::shared_ptr<Scorer>>(m, "Scorer")
      .def_property_readonly("vocab_size", &Scorer::vocab_size)
      .def("sequence_logprob",
           [](const Scorer& s, const std::vector<TokenId>& tokens,
              const std::vector<double>& conditioning) {
             return SequenceLogProb(s, tokens, conditioning);
           },
           py::arg("tokens"), py::arg("conditioning") = std::vector<double>{});
  py::class_<UniformScorer, Scorer, std::shared_ptr<UniformScorer>>(m, "UniformScorer")
      .def(py::init<std::size_t>(), py::arg("vocab_size"));
  py::class_<BigramTableScorer, Scorer, std::shared_ptr<BigramTableScorer>>(
      m, "BigramTableScorer")
      .def(py::init<std::vector<std::vector<double>>>(), py::arg("probs"));
  py::class_<NGramScorer, Scorer, std::shared_ptr<NGramScorer>>(m, "NGramScorer")
      .def_static("load",
                  [](const std::string& path) {
                    return std::make_shared<NGramScorer>(
                        std::make_shared<const NGramModel>(NGramModel::Load(path)));
                  })
      .def_property_readonly("vocab",
                             [](const NGramScorer& s) { return s.model().vocab(); })
      .def_property_readonly("order", [](const NGramScorer& s) { return s.model().order(); })
      .def("to_json", [](const NGramScorer& s) { return s.model().ToJson(); });
  m.def("train_ngram", &TrainNGram, py::arg("sentences"), py::arg("order") = 2,
        py::arg("alpha") = 1.0);
  py::class_<nn::CaptionModelScorer, Scorer, std::shared_ptr<nn::CaptionModelScorer>>(
      m, "CaptionModelScorer")
      .def_static("load",
                  [](const std::string& path) {
                    return std::make_shared<nn::CaptionModelScorer>(
                        std::make_shared<const nn::CaptionModelParams>(
                            nn::LoadCheckpoint(path)));
                  })
      .def_property_readonly(
          "vocab", [](const nn::CaptionModelScorer& s) { return s.model().vocab; });

  py::class_<Hypothesis>(m, "Hypothesis")
      .def_readonly("tokens", &Hypothesis::tokens)
      .def_readonly("logprob", &Hypothesis::logprob)
      .def_readonly("fsm_state", &Hypothesis::fsm_state)
      .def_readonly("completed", &Hypothesis::completed);

  py::class_<DecodeResult>(m, "DecodeResult")
      .def_readonly("best", &DecodeResult::best)
      .def_readonly("per_state_best", &DecodeResult::per_state_best)
      .def_readonly("satisfied_count", &DecodeResult::satisfied_count)
      .def_readonly("steps", &DecodeResult::steps)
      .def_property_readonly("status",
                             [](const DecodeResult& r) { return StatusName(r.status); })
      .def("to_json", &DecodeResultToJson, py::arg("vocab"),
           py::arg("per_state") = false);

  py::class_<MultiPhraseResult>(m, "MultiPhraseResult")
      .def_readonly("result", &MultiPhraseResult::result)
      .def_readonly("selected", &MultiPhraseResult::selected)
      .def_readonly("runs", &MultiPhraseResult::runs);

  m.def("constrained_beam_search",
        [](const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
           std::size_t beam_size, std::size_t max_len, bool no_repeat,
           bool length_normalize, const std::vector<double>& conditioning) {
          py::gil_scoped_release release;
          return ConstrainedBeamSearch(
              scorer, fsm, vocab,
              MakeParams(beam_size, max_len, no_repeat, length_normalize), conditioning);
        },
        py::arg("scorer"), py::arg("fsm"), py::arg("vocab"), py::arg("beam_size") = 5,
        py::arg("max_len") = 20, py::arg("no_repeat") = true,
        py::arg("length_normalize") = false,
        py::arg("conditioning") = std::vector<double>{});
  m.def("beam_search",
        [](const Scorer& scorer, const Vocabulary& vocab, std::size_t beam_size,
           std::size_t max_len, bool no_repeat, bool length_normalize,
           const std::vector<double>& conditioning) {
          py::gil_scoped_release release;
          return BeamSearch(scorer, vocab,
                            MakeParams(beam_size, max_len, no_repeat, length_normalize),
                            conditioning);
        },
        py::arg("scorer"), py::arg("vocab"), py::arg("beam_size") = 5,
        py::arg("max_len") = 20, py::arg("no_repeat") = true,
        py::arg("length_normalize") = false,
        py::arg("conditioning") = std::vector<double>{});
  m.def("decode_multi_phrase",
        [](const Scorer& scorer, const std::vector<Fsm>& fsms, const Vocabulary& vocab,
           std::size_t beam_size, std::size_t max_len, bool no_repeat,
           const std::vector<double>& conditioning) {
          py::gil_scoped_release release;
          return DecodeMultiPhrase(scorer, std::span<const Fsm>(fsms), vocab,
                                   MakeParams(beam_size, max_len, no_repeat, false),
                                   conditioning);
        },
        py::arg("scorer"), py::arg("fsms"), py::arg("vocab"), py::arg("beam_size") = 5,
        py::arg("max_len") = 20, py::arg("no_repeat") = true,
        py::arg("conditioning") = std::vector<double>{});
  m.def("exhaustive_decode",
        [](const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
           std::size_t max_len, bool no_repeat, const std::vector<double>& conditioning) {
          return ExhaustiveDecode(scorer, fsm, vocab,
                                  MakeParams(1, max_len, no_repeat, false), conditioning);
        },
        py::arg("scorer"), py::arg("fsm"), py::arg("vocab"), py::arg("max_len"),
        py::arg("no_repeat") = true, py::arg("conditioning") = std::vector<double>{});

  m.def("tokenize", &Tokenize, py::arg("line"));

  py::class_<F1Score>(m, "F1Score")
      .def_readonly("precision", &F1Score::precision)
      .def_readonly("recall", &F1Score::recall)
      .def_readonly("f1", &F1Score::f1)
      .def_readonly("degenerate", &F1Score::degenerate);
  m.def("f1_mentions",
        [](const std::vector<std::string>& generated,
           const std::vector<std::vector<std::string>>& references,
           const std::string& object, const std::set<std::string>& mentions) {
          if (generated.size() != references.size()) {
            throw ContractViolation("generated and references differ in length");
          }
          std::vector<EvalPair> pairs;
          for (std::size_t k = 0; k < generated.size(); ++k) {
            EvalPair p{Tokenize(generated[k]), {}};
            for (const auto& r : references[k]) p.references.push_back(Tokenize(r));
            pairs.push_back(std::move(p));
          }
          return F1Mentions(pairs, MentionSpec{object, mentions});
        },
        py::arg("generated"), py::arg("references"), py::arg("object"),
        py::arg("mentions"));
}
