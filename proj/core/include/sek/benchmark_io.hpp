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

// Benchmark problem loading (HumanEval / MBPP JSONL, APPS directories),
// few-shot demonstration selection and entry-point discovery.

#ifndef SEK_BENCHMARK_IO_HPP
#define SEK_BENCHMARK_IO_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sek {

enum class IoFormat { kCallBased, kStdio };
enum class Difficulty { kIntroductory, kInterview, kCompetition };
enum class Benchmark { kHumanEval, kMbpp, kApps };
enum class BenchmarkFormat { kHumanEvalJsonl, kMbppJsonl, kAppsDir };

std::string_view to_string(IoFormat f);
std::string_view to_string(Difficulty d);
std::string_view to_string(Benchmark b);
std::string_view to_string(BenchmarkFormat f);

IoFormat io_format_from_string(std::string_view s);
Difficulty difficulty_from_string(std::string_view s);
Benchmark benchmark_from_string(std::string_view s);
BenchmarkFormat benchmark_format_from_string(std::string_view s);

/// The benchmark a file format belongs to.
Benchmark benchmark_of(BenchmarkFormat f);

/// One benchmark coding problem.
struct ProblemSpec {
  std::string task_id;
  /// Problem statement shown to the model. For APPS this is the question
  /// followed by the starter code, when there is one.
  std::string description;
  std::optional<std::string> entry_point;
  /// Test-suite source (HumanEval/MBPP) or the raw input_output.json (APPS).
  std::string tests;
  IoFormat io_format = IoFormat::kCallBased;
  std::optional<Difficulty> difficulty;
  Benchmark benchmark = Benchmark::kHumanEval;

  std::optional<std::string> starter_code;        // APPS only
  std::optional<std::string> canonical_solution;  // when the release ships one

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// A few-shot exemplar for keyword extraction.
struct Demonstration {
  ProblemSpec problem;
  std::string keywords_block;
  std::optional<std::string> solution;
};

/// Curated keyword block for one demonstration problem, keyed by task id.
struct DemoBlock {
  std::string keywords_block;
  std::optional<std::string> solution;
};
using DemoBlocks = std::map<std::string, DemoBlock, std::less<>>;

/// Loads a benchmark in file order. Throws InputError naming the file, line
/// and missing field for malformed records, and "empty benchmark" when no
/// record is present.
std::vector<ProblemSpec> load_benchmark(const std::filesystem::path& path,
                                        BenchmarkFormat format);

/// Directories load as APPS; JSONL whose first task id looks like MBPP
/// ("Mbpp/…" or an integer) loads as MBPP; everything else as HumanEval.
BenchmarkFormat detect_format(const std::filesystem::path& path);

/// Inverse of load_benchmark: writes problems so that loading them back
/// yields equal ProblemSpecs.
void write_benchmark(std::span<const ProblemSpec> problems,
                     const std::filesystem::path& path, BenchmarkFormat format);

/// Reads one task id per line (blank lines and `#` comments ignored).
std::vector<std::string> load_id_file(const std::filesystem::path& path);

/// Keeps the problems whose task id is listed, in benchmark order. Numeric
/// ids also match zero-padded APPS directory names ("6" matches "0006").
std::vector<ProblemSpec> filter_by_ids(std::span<const ProblemSpec> problems,
                                       std::span<const std::string> ids);

/// Indices of the demonstration problems: HumanEval the first two, MBPP the
/// first one, APPS the two shortest descriptions (characters, ties by
/// position) among the first five, returned in benchmark order.
std::vector<std::size_t> select_demonstration_indices(
    std::span<const ProblemSpec> problems, Benchmark benchmark);

/// Demonstrations for `benchmark`, pairing each selected problem with its
/// curated block. Throws InputError when too few problems are supplied or a
/// selected problem has no block.
std::vector<Demonstration> select_demonstrations(
    std::span<const ProblemSpec> problems, Benchmark benchmark,
    const DemoBlocks& blocks);

/// Reads JSONL records `{"task_id", "keywords_block", "solution"?}`.
DemoBlocks load_demo_blocks(const std::filesystem::path& path);

/// Name of the first `def name(` signature in the description, if any.
std::optional<std::string> extract_function_name(const ProblemSpec& problem);

/// The explicit entry point when the record carries one, otherwise the
/// scanned signature.
std::optional<std::string> resolve_function_name(const ProblemSpec& problem);

}  // namespace sek

#endif  // SEK_BENCHMARK_IO_HPP
