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

#ifndef SEK_PROMPT_PIPELINE_HPP
#define SEK_PROMPT_PIPELINE_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sek/benchmark_io.hpp"
#include "sek/keyrank.hpp"

namespace sek {

/// Transition sentence placed between the problem and its keyword block.
inline constexpr std::string_view kBufferPhrase =
    "Analyze the following key terms and their relationships within the "
    "problem context:";

inline constexpr std::size_t kGuidelineCount = 5;
inline constexpr std::size_t kDefaultMaxKeywords = 5;

/// Text assets for the extraction and generation prompts. Every field may be
/// overridden from a templates directory; see load_templates().
///
/// `{max_keywords}` is substituted in the guidelines, `{problem}` and
/// `{format_hint}` in the generation templates.
struct PromptTemplates {
  std::string instruction;
  std::string io_format;
  std::array<std::string, kGuidelineCount> guidelines;
  std::string generation;       // HumanEval / MBPP
  std::string apps_generation;  // two-shot, covers both APPS formats
  std::string apps_call_based_hint;
  std::string apps_stdio_hint;
};

const PromptTemplates& default_templates();

/// Reads instruction.txt, io_format.txt, guideline_1.txt … guideline_5.txt,
/// generation.txt, apps_generation.txt, apps_call_based_hint.txt and
/// apps_stdio_hint.txt from `dir`. Missing files keep their defaults.
PromptTemplates load_templates(const std::filesystem::path& dir);

/// Writes the templates in the layout load_templates() reads.
void write_templates(const PromptTemplates& templates,
                     const std::filesystem::path& dir);

struct ExtractionPromptConfig {
  std::array<bool, kGuidelineCount> guidelines_enabled = {true, true, true,
                                                          true, true};
  std::size_t max_keywords = kDefaultMaxKeywords;
  std::vector<Demonstration> demonstrations;
};

/// Throws ConfigError when max_keywords is 0 or a demonstration block has
/// no parseable keyword entry.
void validate(const ExtractionPromptConfig& config);

/// Instruction, I/O format, enabled guidelines (renumbered 1..k), one block
/// per demonstration and finally the target problem, separated by blank
/// lines.
std::string build_extraction_prompt(
    const ProblemSpec& problem, const ExtractionPromptConfig& config,
    const PromptTemplates& templates = default_templates());

/// `[text]: explanation`, escaping `\` and `]` in the text.
std::string render_keyword(const Keyword& keyword);

/// Entries separated by one blank line.
std::string render_keywords(std::span<const Keyword> keywords);

/// Collects `[keyword]: explanation` entries in order of appearance. An
/// explanation runs until the next keyword line or the end of the text.
/// Leading list markers (`-`, `*`, `1.`) are tolerated. Returns at most
/// `max_keywords` entries. Throws ParseFailure when nothing matches.
std::vector<Keyword> parse_keyword_response(
    std::string_view response, std::size_t max_keywords = kDefaultMaxKeywords);

struct EnrichedProblem {
  ProblemSpec original;
  RankedKeywords ranked;
  std::string text;
};

/// Appends the buffer phrase and the ranked entries to the description.
/// Exactly one blank line separates the description from the buffer
/// phrase; the description itself is never modified.
EnrichedProblem enrich_problem(const ProblemSpec& problem,
                               const RankedKeywords& ranked);

/// The code-generation prompt around `problem_text` (the raw description
/// for the default strategy, the enriched text otherwise).
std::string build_generation_prompt(
    const ProblemSpec& problem, std::string_view problem_text,
    const PromptTemplates& templates = default_templates());

}  // namespace sek

#endif  // SEK_PROMPT_PIPELINE_HPP
