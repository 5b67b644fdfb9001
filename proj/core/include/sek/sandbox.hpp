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

// Client side of the sandbox runner protocol.
//
// The runner is an external program. It reads one request object on stdin
// and writes one verdict object on stdout:
//
//   request  {"mode": "call_based" | "stdio",
//             "solution_source": str,
//             "test_source": str,                      (call_based)
//             "cases": [{"input": str,
//                        "expected_output": str | [str]}],  (stdio)
//             "timeout_s": float,
//             "entry_point": str | null}
//   verdict  {"status": "pass" | "fail" | "error" | "timeout",
//             "failed_case": int | null,
//             "stderr_excerpt": str | null,
//             "duration_s": float}
//
// For call_based requests the runner executes solution_source and then
// test_source in one namespace and calls check(<entry_point>).

#ifndef SEK_SANDBOX_HPP
#define SEK_SANDBOX_HPP

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sek/benchmark_io.hpp"

namespace sek {

enum class Verdict { kPass, kFail, kError, kTimeout };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct StdioCase {
  std::string input;
  /// A string, or an array of acceptable outputs.
  std::string expected_output_json;
};

struct SandboxRequest {
  IoFormat mode = IoFormat::kCallBased;
  std::string solution_source;
  std::string test_source;
  std::vector<StdioCase> cases;
  double timeout_s = 10.0;
  std::optional<std::string> entry_point;
};

struct SandboxVerdict {
  Verdict status = Verdict::kError;
  std::optional<int> failed_case;
  std::optional<std::string> stderr_excerpt;
  double duration_s = 0.0;
};

std::string to_json(const SandboxRequest& r);
SandboxVerdict verdict_from_json(std::string_view text);
std::string to_json(const SandboxVerdict& v);

/// Builds the runner request for a candidate solution. HumanEval and MBPP
/// tests are passed through; APPS input_output.json becomes stdio cases or
/// a generated check() for call-based problems.
SandboxRequest make_sandbox_request(const ProblemSpec& problem,
                                    std::string solution, double timeout_s);

/// Spawns the runner command once per request. The runner is killed when it
/// exceeds timeout_s plus `grace`.
class SandboxClient {
 public:
  explicit SandboxClient(std::vector<std::string> command,
                         std::chrono::milliseconds grace =
                             std::chrono::milliseconds(1000));

  /// True when the runner executable can be found.
  bool available() const;
  const std::vector<std::string>& command() const { return command_; }

  /// Never throws for candidate-level problems; a missing or crashing runner
  /// yields status error with a detail message.
  SandboxVerdict execute(const SandboxRequest& request) const;

 private:
  std::vector<std::string> command_;
  std::chrono::milliseconds grace_;
};

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view command_line);

}  // namespace sek

#endif  // SEK_SANDBOX_HPP
