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

#ifndef CBS_ORACLE_H_
#define CBS_ORACLE_H_

#include <optional>
#include <span>

#include "cbs/beam_search.h"

namespace cbs {

// Exhaustive decode for tiny instances: enumerates every sequence of at most
// max_len tokens ending in the end marker (honoring no_repeat), keeps the
// ones the FSM accepts, and returns the best under RanksBefore. beam_size
// and length_normalize are ignored. Throws CapacityError when more than
// `max_sequences` prefixes would be visited.
std::optional<Hypothesis> ExhaustiveDecode(
    const Scorer& scorer, const Fsm& fsm, const Vocabulary& vocab,
    const SearchParams& params, std::span<const double> conditioning = {},
    std::size_t max_sequences = 20'000'000);

}  // namespace cbs

#endif  // CBS_ORACLE_H_
