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

#ifndef CBS_TEXT_H_
#define CBS_TEXT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

// Lower-cases and splits on Unicode whitespace. No other normalization.
std::vector<std::string> Tokenize(std::string_view line);

std::string ToLower(std::string_view text);

std::string Join(std::span<const std::string> words, std::string_view sep = " ");

// One tokenized sentence per non-empty line.
std::vector<std::vector<std::string>> ReadCorpus(const std::string& path);
std::vector<std::vector<std::string>> ParseCorpus(std::string_view text);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace cbs

#endif  // CBS_TEXT_H_
