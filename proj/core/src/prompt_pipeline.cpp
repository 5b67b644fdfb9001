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

#include "sek/prompt_pipeline.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sek/error.hpp"

namespace sek {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kWhitespace = " \t\r\n";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWhitespace);
  return s.substr(b, e - b + 1);
}

std::string_view trim_end(std::string_view s) {
  const auto e = s.find_last_not_of(kWhitespace);
  return e == std::string_view::npos ? std::string_view{} : s.substr(0, e + 1);
}

std::string replace_all(std::string s, std::string_view from,
                        std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// Skips "- ", "* ", "1. ", "2) " style list markers.
std::string_view strip_list_marker(std::string_view line) {
  if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') &&
      (line[1] == ' ' || line[1] == '\t')) {
    return trim(line.substr(2));
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
  }
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') &&
      (line[i + 1] == ' ' || line[i + 1] == '\t')) {
    return trim(line.substr(i + 2));
  }
  return line;
}

// Recognizes `[text]: explanation`. Inside the brackets `\]` and `\\` are
// escapes; any other backslash is literal.
std::optional<Keyword> match_keyword_line(std::string_view raw) {
  std::string_view line = strip_list_marker(trim(raw));
  if (line.empty() || line.front() != '[') return std::nullopt;
  std::string text;
  std::size_t i = 1;
  bool closed = false;
  for (; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && i + 1 < line.size() &&
        (line[i + 1] == ']' || line[i + 1] == '\\')) {
      text.push_back(line[++i]);
    } else if (c == ']') {
      closed = true;
      break;
    } else {
      text.push_back(c);
    }
  }
  if (!closed || i + 1 >= line.size() || line[i + 1] != ':') return std::nullopt;
  const auto trimmed = trim(text);
  if (trimmed.empty()) return std::nullopt;
  return Keyword{std::string(trimmed), std::string(line.substr(i + 2))};
}

std::string read_optional(const fs::path& path, std::string fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fallback;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PromptTemplates make_default_templates() {
  PromptTemplates t;
  t.instruction =
      "You are given a programming problem. Extract the keywords that are "
      "most important for solving it and explain each one so that a "
      "programmer can implement a correct solution.";
  t.io_format =
      "Input: the description of a programming problem.\n"
      "Output: a list of keywords with their explanations, one entry per "
      "keyword, in the form [keyword]: explanation.";
  t.guidelines = {
      "Prioritize terms describing the inputs, the expected output and any "
      "supplementary content such as term clarifications or value ranges.",
      "Make every explanation precise and unambiguous.",
      "Keep every explanation consistent with the example test cases given "
      "in the problem.",
      "Output at most {max_keywords} keywords; keep only the most important "
      "ones.",
      "Write each keyword on its own line exactly as [keyword]: explanation, "
      "with no other text before or after the list.",
  };
  t.generation =
      "Please provide a self-contained Python script that solves the "
      "following problem in a markdown code block:\n```\n{problem}\n```\n";
  t.apps_generation =
      "Write a Python solution for the programming problem below. Return the "
      "complete program in a single markdown code block.\n\n"
      "### Example 1\n"
      "QUESTION:\n"
      "Read an integer n from standard input and print the sum 1 + 2 + ... + n.\n"
      "Use Standard Input format\n"
      "ANSWER:\n"
      "```python\n"
      "n = int(input())\n"
      "print(n * (n + 1) // 2)\n"
      "```\n\n"
      "### Example 2\n"
      "QUESTION:\n"
      "Given a list of integers nums, return the largest element.\n"
      "class Solution:\n"
      "    def largest(self, nums):\n"
      "Use Call-Based format\n"
      "ANSWER:\n"
      "```python\n"
      "class Solution:\n"
      "    def largest(self, nums):\n"
      "        return max(nums)\n"
      "```\n\n"
      "### Problem\n"
      "QUESTION:\n"
      "{problem}\n"
      "{format_hint}\n"
      "ANSWER:\n";
  t.apps_call_based_hint = "Use Call-Based format";
  t.apps_stdio_hint = "Use Standard Input format";
  return t;
}

}  // namespace

const PromptTemplates& default_templates() {
  static const PromptTemplates templates = make_default_templates();
  return templates;
}

PromptTemplates load_templates(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError(
        fmt::format("{}: templates directory not found", dir.string()));
  }
  const auto& d = default_templates();
  PromptTemplates t;
  t.instruction = read_optional(dir / "instruction.txt", d.instruction);
  t.io_format = read_optional(dir / "io_format.txt", d.io_format);
  for (std::size_t i = 0; i < kGuidelineCount; ++i) {
    t.guidelines[i] = read_optional(
        dir / fmt::format("guideline_{}.txt", i + 1), d.guidelines[i]);
  }
  t.generation = read_optional(dir / "generation.txt", d.generation);
  t.apps_generation =
      read_optional(dir / "apps_generation.txt", d.apps_generation);
  t.apps_call_based_hint =
      read_optional(dir / "apps_call_based_hint.txt", d.apps_call_based_hint);
  t.apps_stdio_hint = read_optional(dir / "apps_stdio_hint.txt", d.apps_stdio_hint);
  return t;
}

void write_templates(const PromptTemplates& t, const fs::path& dir) {
  fs::create_directories(dir);
  auto put = [&](std::string_view name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("{}: cannot write", name));
    out << body;
  };
  put("instruction.txt", t.instruction);
  put("io_format.txt", t.io_format);
  for (std::size_t i = 0; i < kGuidelineCount; ++i) {
    put(fmt::format("guideline_{}.txt", i + 1), t.guidelines[i]);
  }
  put("generation.txt", t.generation);
  put("apps_generation.txt", t.apps_generation);
  put("apps_call_based_hint.txt", t.apps_call_based_hint);
  put("apps_stdio_hint.txt", t.apps_stdio_hint);
}

void validate(const ExtractionPromptConfig& config) {
  if (config.max_keywords == 0) {
    throw ConfigError("max_keywords must be >= 1");
  }
  for (const auto& demo : config.demonstrations) {
    try {
      parse_keyword_response(demo.keywords_block,
                             std::numeric_limits<std::size_t>::max());
    } catch (const ParseFailure&) {
      throw ConfigError(fmt::format(
          "demonstration '{}': keywords block has no [keyword]: entries",
          demo.problem.task_id));
    }
  }
}

std::string build_extraction_prompt(const ProblemSpec& problem,
                                    const ExtractionPromptConfig& config,
                                    const PromptTemplates& templates) {
  validate(config);
  if (config.demonstrations.empty()) {
    spdlog::warn("extraction prompt for '{}' has no demonstrations",
                 problem.task_id);
  }

  std::string out;
  out += trim(templates.instruction);
  out += "\n\n";
  out += trim(templates.io_format);
  out += "\n\n";

  std::size_t number = 0;
  std::string guideline_lines;
  for (std::size_t i = 0; i < kGuidelineCount; ++i) {
    if (!config.guidelines_enabled[i]) continue;
    const auto text = replace_all(std::string(trim(templates.guidelines[i])),
                                  "{max_keywords}",
                                  std::to_string(config.max_keywords));
    guideline_lines += fmt::format("{}. {}\n", ++number, text);
  }
  if (number > 0) {
    out += "Guidelines:\n";
    out += guideline_lines;
    out += '\n';
  }

  std::size_t demo_no = 0;
  for (const auto& demo : config.demonstrations) {
    out += fmt::format("### Example {}\nProblem:\n{}\n\nKeywords:\n{}\n\n",
                       ++demo_no, trim_end(demo.problem.description),
                       trim(demo.keywords_block));
  }
  out += fmt::format("### Problem\nProblem:\n{}\n\nKeywords:\n",
                     trim_end(problem.description));
  return out;
}

std::string render_keyword(const Keyword& keyword) {
  std::string text;
  text.reserve(keyword.text.size());
  for (const char c : keyword.text) {
    if (c == '\\' || c == ']') text.push_back('\\');
    text.push_back(c);
  }
  return fmt::format("[{}]: {}", text, keyword.explanation);
}

std::string render_keywords(std::span<const Keyword> keywords) {
  std::string out;
  for (const auto& k : keywords) {
    if (!out.empty()) out += "\n\n";
    out += render_keyword(k);
  }
  return out;
}

std::vector<Keyword> parse_keyword_response(std::string_view response,
                                            std::size_t max_keywords) {
  std::vector<Keyword> found;
  std::optional<Keyword> current;
  auto flush = [&] {
    if (!current) return;
    current->explanation = std::string(trim(current->explanation));
    if (!current->explanation.empty()) found.push_back(std::move(*current));
    current.reset();
  };

  std::size_t pos = 0;
  while (pos <= response.size()) {
    auto nl = response.find('\n', pos);
    if (nl == std::string_view::npos) nl = response.size();
    const auto line = response.substr(pos, nl - pos);
    if (auto k = match_keyword_line(line)) {
      flush();
      current = std::move(k);
    } else if (current) {
      current->explanation += '\n';
      current->explanation += line;
    }
    pos = nl + 1;
  }
  flush();

  if (found.empty()) {
    throw ParseFailure("no [keyword]: explanation entries in response");
  }
  if (found.size() > max_keywords) found.resize(max_keywords);
  return found;
}

EnrichedProblem enrich_problem(const ProblemSpec& problem,
                               const RankedKeywords& ranked) {
  EnrichedProblem e{problem, ranked, problem.description};
  if (ranked.empty()) return e;

  const std::string& d = problem.description;
  if (d.empty() || d.back() != '\n') {
    e.text += "\n\n";
  } else if (d.size() < 2 || d[d.size() - 2] != '\n') {
    e.text += "\n";
  }
  e.text += kBufferPhrase;
  for (const auto& ck : ranked.ordered) {
    e.text += "\n\n";
    e.text += render_keyword(ck.keyword);
  }
  e.text += '\n';
  return e;
}

std::string build_generation_prompt(const ProblemSpec& problem,
                                    std::string_view problem_text,
                                    const PromptTemplates& templates) {
  if (problem.benchmark == Benchmark::kApps) {
    const auto& hint = problem.io_format == IoFormat::kCallBased
                           ? templates.apps_call_based_hint
                           : templates.apps_stdio_hint;
    auto out = replace_all(templates.apps_generation, "{format_hint}",
                           trim(hint));
    return replace_all(std::move(out), "{problem}", trim_end(problem_text));
  }
  return replace_all(templates.generation, "{problem}", trim(problem_text));
}

}  // namespace sek
