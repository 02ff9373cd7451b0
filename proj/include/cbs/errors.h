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

#ifndef CBS_ERRORS_H_
#define CBS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbs {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constraint references a word or token id the vocabulary does not hold,
// or is otherwise malformed.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// A configured size cap (disjunction count, product state count, beam
// memory) would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition: out-of-range ids, a decode
// state handed to the wrong scorer, mismatched dimensions.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Malformed input data. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what
                        : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input data that parses but cannot be used (missing words, empty corpus).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in model math, divergence during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbs

#endif  // CBS_ERRORS_H_
