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

#include "sek/benchmark_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sek/error.hpp"

namespace sek {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("{}: cannot write file", path.string()));
  out << data;
}

std::string require_string(const json& rec, std::string_view field,
                           const fs::path& file, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) {
    throw InputError(fmt::format("{}:{}: missing field '{}'", file.string(),
                                 line, field));
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw InputError(fmt::format("{}:{}: field '{}' is not a string",
                               file.string(), line, field));
}

bool is_all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::vector<ProblemSpec> load_jsonl(const fs::path& path, Benchmark bench) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));

  std::vector<ProblemSpec> problems;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c) != 0; })) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(fmt::format("{}:{}: invalid JSON: {}", path.string(),
                                   lineno, e.what()));
    }
    if (!rec.is_object()) {
      throw InputError(
          fmt::format("{}:{}: record is not an object", path.string(), lineno));
    }

    ProblemSpec p;
    p.benchmark = bench;
    p.io_format = IoFormat::kCallBased;
    p.task_id = require_string(rec, "task_id", path, lineno);
    p.description = require_string(rec, "prompt", path, lineno);
    p.tests = require_string(rec, "test", path, lineno);
    if (auto it = rec.find("entry_point"); it != rec.end() && !it->is_null()) {
      p.entry_point = require_string(rec, "entry_point", path, lineno);
    }
    if (auto it = rec.find("canonical_solution");
        it != rec.end() && it->is_string()) {
      p.canonical_solution = it->get<std::string>();
    }
    if (p.description.empty()) {
      throw InputError(
          fmt::format("{}:{}: empty 'prompt'", path.string(), lineno));
    }
    if (!seen.insert(p.task_id).second) {
      throw InputError(fmt::format("{}:{}: duplicate task_id '{}'",
                                   path.string(), lineno, p.task_id));
    }
    problems.push_back(std::move(p));
  }
  if (problems.empty()) {
    throw InputError(fmt::format("{}: empty benchmark", path.string()));
  }
  return problems;
}

ProblemSpec load_apps_problem(const fs::path& dir) {
  ProblemSpec p;
  p.benchmark = Benchmark::kApps;
  p.task_id = dir.filename().string();

  const auto question = dir / "question.txt";
  const auto io = dir / "input_output.json";
  if (!fs::exists(question)) {
    throw InputError(
        fmt::format("{}: missing field 'question.txt'", dir.string()));
  }
  if (!fs::exists(io)) {
    throw InputError(
        fmt::format("{}: missing field 'input_output.json'", dir.string()));
  }
  p.description = read_file(question);
  if (p.description.empty()) {
    throw InputError(fmt::format("{}: empty question.txt", question.string()));
  }
  p.tests = read_file(io);

  json io_json;
  try {
    io_json = json::parse(p.tests);
  } catch (const json::parse_error& e) {
    throw InputError(
        fmt::format("{}: invalid JSON: {}", io.string(), e.what()));
  }
  if (!io_json.is_object() || !io_json.contains("inputs") ||
      !io_json.contains("outputs")) {
    throw InputError(fmt::format("{}: missing field 'inputs'/'outputs'",
                                 io.string()));
  }
  if (auto it = io_json.find("fn_name"); it != io_json.end() && it->is_string()) {
    p.entry_point = it->get<std::string>();
  }

  if (const auto starter = dir / "starter_code.py"; fs::exists(starter)) {
    std::string code = read_file(starter);
    if (!code.empty()) {
      p.starter_code = code;
      p.description += "\n" + code;
    }
  }
  p.io_format = p.starter_code ? IoFormat::kCallBased : IoFormat::kStdio;

  if (const auto meta = dir / "metadata.json"; fs::exists(meta)) {
    try {
      const json m = json::parse(read_file(meta));
      if (auto it = m.find("difficulty"); it != m.end() && it->is_string()) {
        p.difficulty = difficulty_from_string(it->get<std::string>());
      }
    } catch (const json::parse_error& e) {
      throw InputError(
          fmt::format("{}: invalid JSON: {}", meta.string(), e.what()));
    } catch (const ConfigError& e) {
      throw InputError(fmt::format("{}: {}", meta.string(), e.what()));
    }
  }
  if (auto it = dir / "solutions.json"; fs::exists(it)) {
    try {
      const json sols = json::parse(read_file(it));
      if (sols.is_array() && !sols.empty() && sols.front().is_string()) {
        p.canonical_solution = sols.front().get<std::string>();
      }
    } catch (const json::parse_error&) {
      // Solutions are optional; a broken file just means none.
    }
  }
  return p;
}

std::vector<ProblemSpec> load_apps_dir(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw InputError(fmt::format("{}: not a directory", root.string()));
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end(), [](const fs::path& a, const fs::path& b) {
    const auto an = a.filename().string();
    const auto bn = b.filename().string();
    if (is_all_digits(an) && is_all_digits(bn) && an.size() != bn.size()) {
      return std::stoull(an) < std::stoull(bn);
    }
    return an < bn;
  });
  std::vector<ProblemSpec> problems;
  problems.reserve(dirs.size());
  for (const auto& d : dirs) problems.push_back(load_apps_problem(d));
  if (problems.empty()) {
    throw InputError(fmt::format("{}: empty benchmark", root.string()));
  }
  return problems;
}

}  // namespace

std::string_view to_string(IoFormat f) {
  return f == IoFormat::kCallBased ? "call_based" : "stdio";
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kIntroductory: return "introductory";
    case Difficulty::kInterview: return "interview";
    case Difficulty::kCompetition: return "competition";
  }
  return "";
}

std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::kHumanEval: return "humaneval";
    case Benchmark::kMbpp: return "mbpp";
    case Benchmark::kApps: return "apps";
  }
  return "";
}

std::string_view to_string(BenchmarkFormat f) {
  switch (f) {
    case BenchmarkFormat::kHumanEvalJsonl: return "humaneval_jsonl";
    case BenchmarkFormat::kMbppJsonl: return "mbpp_jsonl";
    case BenchmarkFormat::kAppsDir: return "apps_dir";
  }
  return "";
}

IoFormat io_format_from_string(std::string_view s) {
  if (s == "call_based") return IoFormat::kCallBased;
  if (s == "stdio") return IoFormat::kStdio;
  throw ConfigError(fmt::format("unknown io format '{}'", s));
}

Difficulty difficulty_from_string(std::string_view s) {
  if (s == "introductory") return Difficulty::kIntroductory;
  if (s == "interview") return Difficulty::kInterview;
  if (s == "competition") return Difficulty::kCompetition;
  throw ConfigError(fmt::format("unknown difficulty '{}'", s));
}

Benchmark benchmark_from_string(std::string_view s) {
  if (s == "humaneval") return Benchmark::kHumanEval;
  if (s == "mbpp") return Benchmark::kMbpp;
  if (s == "apps") return Benchmark::kApps;
  throw ConfigError(fmt::format("unknown benchmark '{}'", s));
}

BenchmarkFormat benchmark_format_from_string(std::string_view s) {
  if (s == "humaneval_jsonl") return BenchmarkFormat::kHumanEvalJsonl;
  if (s == "mbpp_jsonl") return BenchmarkFormat::kMbppJsonl;
  if (s == "apps_dir") return BenchmarkFormat::kAppsDir;
  throw ConfigError(fmt::format("unknown benchmark format '{}'", s));
}

Benchmark benchmark_of(BenchmarkFormat f) {
  switch (f) {
    case BenchmarkFormat::kHumanEvalJsonl: return Benchmark::kHumanEval;
    case BenchmarkFormat::kMbppJsonl: return Benchmark::kMbpp;
    case BenchmarkFormat::kAppsDir: return Benchmark::kApps;
  }
  return Benchmark::kHumanEval;
}

std::vector<ProblemSpec> load_benchmark(const fs::path& path,
                                        BenchmarkFormat format) {
  switch (format) {
    case BenchmarkFormat::kHumanEvalJsonl:
      return load_jsonl(path, Benchmark::kHumanEval);
    case BenchmarkFormat::kMbppJsonl:
      return load_jsonl(path, Benchmark::kMbpp);
    case BenchmarkFormat::kAppsDir:
      return load_apps_dir(path);
  }
  throw ConfigError("unknown benchmark format");
}

BenchmarkFormat detect_format(const fs::path& path) {
  if (fs::is_directory(path)) return BenchmarkFormat::kAppsDir;
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!rec.is_object()) break;
    const auto it = rec.find("task_id");
    if (it == rec.end()) break;
    if (it->is_number_integer()) return BenchmarkFormat::kMbppJsonl;
    if (it->is_string()) {
      const auto id = it->get<std::string>();
      if (id.rfind("Mbpp/", 0) == 0 || is_all_digits(id)) {
        return BenchmarkFormat::kMbppJsonl;
      }
    }
    break;
  }
  return BenchmarkFormat::kHumanEvalJsonl;
}

void write_benchmark(std::span<const ProblemSpec> problems, const fs::path& path,
                     BenchmarkFormat format) {
  if (format != BenchmarkFormat::kAppsDir) {
    std::string out;
    for (const auto& p : problems) {
      json rec = {{"task_id", p.task_id},
                  {"prompt", p.description},
                  {"entry_point", p.entry_point ? json(*p.entry_point) : json()},
                  {"test", p.tests}};
      if (p.canonical_solution) rec["canonical_solution"] = *p.canonical_solution;
      out += rec.dump();
      out += '\n';
    }
    write_file(path, out);
    return;
  }

  fs::create_directories(path);
  for (const auto& p : problems) {
    const auto dir = path / p.task_id;
    fs::create_directories(dir);
    std::string question = p.description;
    if (p.starter_code) {
      const std::string suffix = "\n" + *p.starter_code;
      if (question.size() >= suffix.size() &&
          question.compare(question.size() - suffix.size(), suffix.size(),
                           suffix) == 0) {
        question.resize(question.size() - suffix.size());
      }
      write_file(dir / "starter_code.py", *p.starter_code);
    }
    write_file(dir / "question.txt", question);
    write_file(dir / "input_output.json", p.tests);
    json meta = json::object();
    if (p.difficulty) meta["difficulty"] = to_string(*p.difficulty);
    write_file(dir / "metadata.json", meta.dump());
    if (p.canonical_solution) {
      write_file(dir / "solutions.json", json::array({*p.canonical_solution}).dump());
    }
  }
}

std::vector<std::string> load_id_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    // Accept comma-separated lists as well as one id per line.
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = tok.find_last_not_of(" \t\r");
      ids.push_back(tok.substr(b, e - b + 1));
    }
  }
  return ids;
}

std::vector<ProblemSpec> filter_by_ids(std::span<const ProblemSpec> problems,
                                       std::span<const std::string> ids) {
  auto canonical = [](const std::string& id) {
    if (!is_all_digits(id)) return id;
    const auto nz = id.find_first_not_of('0');
    return nz == std::string::npos ? std::string("0") : id.substr(nz);
  };
  std::set<std::string, std::less<>> wanted;
  for (const auto& id : ids) wanted.insert(canonical(id));

  std::vector<ProblemSpec> out;
  for (const auto& p : problems) {
    if (wanted.contains(canonical(p.task_id))) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> select_demonstration_indices(
    std::span<const ProblemSpec> problems, Benchmark benchmark) {
  switch (benchmark) {
    case Benchmark::kHumanEval:
      if (problems.size() < 2) {
        throw InputError("humaneval demonstrations need at least 2 problems");
      }
      return {0, 1};
    case Benchmark::kMbpp:
      if (problems.empty()) {
        throw InputError("mbpp demonstrations need at least 1 problem");
      }
      return {0};
    case Benchmark::kApps: {
      if (problems.size() < 5) {
        throw InputError("apps demonstrations need at least 5 problems");
      }
      std::vector<std::size_t> idx(5);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return problems[a].description.size() < problems[b].description.size();
      });
      idx.resize(2);
      std::sort(idx.begin(), idx.end());
      return idx;
    }
  }
  throw ConfigError("unknown benchmark");
}

std::vector<Demonstration> select_demonstrations(
    std::span<const ProblemSpec> problems, Benchmark benchmark,
    const DemoBlocks& blocks) {
  std::vector<Demonstration> demos;
  for (const auto i : select_demonstration_indices(problems, benchmark)) {
    const auto& p = problems[i];
    const auto it = blocks.find(p.task_id);
    if (it == blocks.end()) {
      throw InputError(
          fmt::format("no keywords block for demonstration '{}'", p.task_id));
    }
    demos.push_back({p, it->second.keywords_block, it->second.solution});
  }
  return demos;
}

DemoBlocks load_demo_blocks(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  DemoBlocks blocks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(fmt::format("{}:{}: invalid JSON: {}", path.string(),
                                   lineno, e.what()));
    }
    DemoBlock b;
    const auto id = require_string(rec, "task_id", path, lineno);
    b.keywords_block = require_string(rec, "keywords_block", path, lineno);
    if (auto it = rec.find("solution"); it != rec.end() && it->is_string()) {
      b.solution = it->get<std::string>();
    }
    blocks.insert_or_assign(id, std::move(b));
  }
  return blocks;
}

std::optional<std::string> extract_function_name(const ProblemSpec& problem) {
  const std::string_view text = problem.description;
  std::size_t pos = 0;
  while ((pos = text.find("def", pos)) != std::string_view::npos) {
    const std::size_t start = pos;
    pos += 3;
    if (start > 0 && is_ident_char(text[start - 1])) continue;
    std::size_t i = pos;
    if (i >= text.size() || (text[i] != ' ' && text[i] != '\t')) continue;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t name_begin = i;
    if (i >= text.size() ||
        std::isdigit(static_cast<unsigned char>(text[i])) != 0) {
      continue;
    }
    while (i < text.size() && is_ident_char(text[i])) ++i;
    if (i == name_begin) continue;
    const std::size_t name_end = i;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i < text.size() && text[i] == '(') {
      return std::string(text.substr(name_begin, name_end - name_begin));
    }
  }
  return std::nullopt;
}

std::optional<std::string> resolve_function_name(const ProblemSpec& problem) {
  if (problem.entry_point && !problem.entry_point->empty()) {
    return problem.entry_point;
  }
  return extract_function_name(problem);
}

}  // namespace sek
