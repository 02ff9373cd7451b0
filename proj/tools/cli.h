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

#ifndef CBS_TOOLS_CLI_H_
#define CBS_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace cbs::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnknownCommand = 64;
inline constexpr int kExitBadConfig = 65;
inline constexpr int kExitDataError = 66;
inline constexpr int kExitNumericError = 70;

// Runs one cbsdecode command. `args` excludes the program name. Regular
// output goes to `out` unless --out names a file; failures write one JSON
// object {"error": ..., "message": ...} to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cbs::cli

#endif  // CBS_TOOLS_CLI_H_
