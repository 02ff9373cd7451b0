# Copyright 2026 The cbsdecode Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Constrained beam search over finite-state machines."""

from cbsdecode._core import (
    BigramTableScorer,
    CaptionModelScorer,
    CapacityError,
    ConstraintError,
    ContractViolation,
    DataError,
    DecodeResult,
    Error,
    F1Score,
    Fsm,
    Hypothesis,
    MultiPhraseResult,
    NGramScorer,
    NumericError,
    ParseError,
    Scorer,
    UniformScorer,
    Vocabulary,
    beam_search,
    compile_constraints,
    compile_disjunctions,
    compile_phrase,
    compile_phrase_alternatives,
    constrained_beam_search,
    decode_multi_phrase,
    exhaustive_decode,
    f1_mentions,
    intersect,
    tokenize,
    train_ngram,
)

__version__ = "0.1.0"
