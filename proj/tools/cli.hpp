// Copyright 2026 The SEK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEK_TOOLS_CLI_HPP
#define SEK_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace sek::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvalErrors = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `sek` invocation. `args` excludes the program name. Results go
/// to `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace sek::cli

#endif  // SEK_TOOLS_CLI_HPP
