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

#include "sek/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sek/error.hpp"

namespace sek {
using nlohmann::json;

namespace {

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(); }

json keywords_json(std::span<const Keyword> ks) {
  json arr = json::array();
  for (const auto& k : ks) {
    arr.push_back({{"text", k.text}, {"explanation", k.explanation}});
  }
  return arr;
}

json guidelines_json(const std::array<bool, kGuidelineCount>& g) {
  json arr = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i]) arr.push_back(i + 1);
  }
  return arr;
}

std::string fraction_string(const PassRate& r) {
  return fmt::format("{}/{}", r.passed, r.total);
}

std::vector<Message> user_message(std::string content) {
  return {Message{"user", std::move(content)}};
}

}  // namespace

std::string_view to_string(Strategy s) {
  return s == Strategy::kDefault ? "default" : "sek";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "default") return Strategy::kDefault;
  if (s == "sek") return Strategy::kSek;
  throw ConfigError(fmt::format("unknown strategy '{}' (expected default or sek)", s));
}

json config_snapshot(const PipelineConfig& c) {
  json j = {{"name", c.name},
            {"strategy", to_string(c.strategy)},
            {"model", c.completion.model},
            {"temperature", c.completion.temperature},
            {"max_tokens", c.completion.max_tokens},
            {"timeout_s", c.timeout_s}};
  if (c.strategy == Strategy::kSek) {
    j["order"] = to_string(c.order_policy);
    j["keyrank"] = c.keyrank_enabled;
    j["guidelines"] = guidelines_json(c.guidelines_enabled);
    j["max_keywords"] = c.max_keywords;
    j["corpus_index"] = c.corpus_index_path;
  }
  return j;
}

json to_json(const RankedKeywords& ranked) {
  json arr = json::array();
  for (const auto& ck : ranked.ordered) {
    arr.push_back({{"text", ck.keyword.text},
                   {"explanation", ck.keyword.explanation},
                   {"category", to_string(ck.category)},
                   {"score", ck.score ? json(*ck.score) : json()}});
  }
  return {{"order", to_string(ranked.order_policy)}, {"keywords", arr}};
}

json to_json(const GenerationRecord& r) {
  json j = {{"task_id", r.task_id},
            {"strategy", to_string(r.strategy)},
            {"extraction_prompt", opt(r.extraction_prompt)},
            {"extraction_response", opt(r.extraction_response)},
            {"extraction_attempts", r.extraction_attempts},
            {"fell_back_to_default", r.fell_back_to_default},
            {"parsed_keywords",
             r.parsed_keywords ? keywords_json(*r.parsed_keywords) : json()},
            {"ranked_keywords",
             r.ranked_keywords ? to_json(*r.ranked_keywords) : json()},
            {"enriched_prompt", r.enriched_prompt},
            {"generation_response", r.generation_response},
            {"extracted_code", r.extracted_code},
            {"verdict", to_string(r.verdict)},
            {"failure_detail", opt(r.failure_detail)},
            {"warnings", r.warnings}};
  return j;
}

PassRate pass_at_1(std::span<const Verdict> verdicts) {
  if (verdicts.empty()) throw ConfigError("pass@1 of an empty verdict list");
  PassRate r;
  r.total = verdicts.size();
  r.passed = static_cast<std::size_t>(
      std::count(verdicts.begin(), verdicts.end(), Verdict::kPass));
  return r;
}

bool EvalReport::has_errors() const {
  return std::any_of(results.begin(), results.end(), [](const ProblemResult& r) {
    return r.verdict == Verdict::kError;
  });
}

json to_json(const EvalReport& report) {
  json problems = json::array();
  std::array<std::size_t, 4> counts{};
  for (const auto& r : report.results) {
    ++counts[static_cast<std::size_t>(r.verdict)];
    json p = {{"task_id", r.task_id}, {"verdict", to_string(r.verdict)}};
    if (r.detail) p["detail"] = *r.detail;
    if (r.fell_back_to_default) p["fell_back_to_default"] = true;
    problems.push_back(std::move(p));
  }
  json j = {
      {"benchmark", report.benchmark},
      {"config", report.config},
      {"problems", problems},
      {"counts",
       {{"pass", counts[0]}, {"fail", counts[1]}, {"error", counts[2]},
        {"timeout", counts[3]}}},
      {"pass_at_1",
       {{"passed", report.pass_at_1.passed},
        {"total", report.pass_at_1.total},
        {"fraction", fraction_string(report.pass_at_1)},
        {"value", report.pass_at_1.value()},
        {"percent", report.pass_at_1.value() * 100.0}}}};
  if (report.timing) {
    j["timing"] = {{"wall_seconds", report.timing->wall_seconds},
                   {"mean_problem_seconds", report.timing->mean_problem_seconds},
                   {"max_problem_seconds", report.timing->max_problem_seconds}};
  }
  return j;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.benchmark = j.at("benchmark").get<std::string>();
    r.config = j.value("config", json::object());
    for (const auto& p : j.at("problems")) {
      ProblemResult pr;
      pr.task_id = p.at("task_id").get<std::string>();
      pr.verdict = verdict_from_string(p.at("verdict").get<std::string>());
      if (auto it = p.find("detail"); it != p.end() && it->is_string()) {
        pr.detail = it->get<std::string>();
      }
      pr.fell_back_to_default = p.value("fell_back_to_default", false);
      r.results.push_back(std::move(pr));
    }
    const auto& pa = j.at("pass_at_1");
    r.pass_at_1 = {pa.at("passed").get<std::size_t>(), pa.at("total").get<std::size_t>()};
    if (auto it = j.find("timing"); it != j.end() && it->is_object()) {
      r.timing = TimingStats{it->value("wall_seconds", 0.0),
                             it->value("mean_problem_seconds", 0.0),
                             it->value("max_problem_seconds", 0.0)};
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("malformed report: {}", e.what()));
  }
  return r;
}

std::string render_table(const EvalReport& report) {
  std::size_t id_w = std::string_view("task_id").size();
  for (const auto& r : report.results) id_w = std::max(id_w, r.task_id.size());
  std::string out = fmt::format("{:<{}}  {:<7}  {}\n", "task_id", id_w, "verdict", "detail");
  out += fmt::format("{:-<{}}  {:-<7}  {:-<6}\n", "", id_w, "", "");
  for (const auto& r : report.results) {
    std::string detail = r.detail.value_or("");
    if (auto nl = detail.find('\n'); nl != std::string::npos) detail.resize(nl);
    if (detail.size() > 60) detail = detail.substr(0, 57) + "...";
    if (r.fell_back_to_default) detail = detail.empty() ? "(fallback)" : "(fallback) " + detail;
    out += fmt::format("{:<{}}  {:<7}  {}\n", r.task_id, id_w, to_string(r.verdict), detail);
  }
  out += fmt::format("\n{}: Pass@1 = {} = {:.2f}%\n", report.benchmark,
                     fraction_string(report.pass_at_1),
                     report.pass_at_1.value() * 100.0);
  return out;
}

json to_json(const AblationReport& report) {
  json arr = json::array();
  for (const auto& v : report.variants) {
    json e = {{"name", v.name}};
    if (v.report) e["report"] = to_json(*v.report);
    if (v.error) e["error"] = *v.error;
    arr.push_back(std::move(e));
  }
  return {{"variants", arr}};
}

AblationReport ablation_from_json(const json& j) {
  AblationReport r;
  try {
    for (const auto& e : j.at("variants")) {
      AblationEntry entry;
      entry.name = e.at("name").get<std::string>();
      if (auto it = e.find("report"); it != e.end()) entry.report = report_from_json(*it);
      if (auto it = e.find("error"); it != e.end()) entry.error = it->get<std::string>();
      r.variants.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("malformed ablation report: {}", e.what()));
  }
  return r;
}

std::string render_table(const AblationReport& report) {
  std::size_t name_w = std::string_view("variant").size();
  for (const auto& v : report.variants) name_w = std::max(name_w, v.name.size());
  std::string out = fmt::format("{:<{}}  {:>9}  {:>8}  {}\n", "variant", name_w,
                                "passed", "pass@1", "note");
  out += fmt::format("{:-<{}}  {:->9}  {:->8}  {:-<4}\n", "", name_w, "", "", "");
  for (const auto& v : report.variants) {
    if (!v.report) {
      out += fmt::format("{:<{}}  {:>9}  {:>8}  error: {}\n", v.name, name_w, "-", "-",
                         v.error.value_or("unknown"));
      continue;
    }
    const auto& pa = v.report->pass_at_1;
    const auto errors = std::count_if(
        v.report->results.begin(), v.report->results.end(),
        [](const ProblemResult& r) { return r.verdict == Verdict::kError; });
    out += fmt::format("{:<{}}  {:>9}  {:>7.2f}%  {}\n", v.name, name_w,
                       fraction_string(pa), pa.value() * 100.0,
                       errors ? fmt::format("{} errors", errors) : std::string());
  }
  return out;
}

// --- Evaluator -------------------------------------------------------------

Evaluator::Evaluator(EvaluatorResources resources) : res_(std::move(resources)) {
  if (res_.client == nullptr) throw ConfigError("evaluator needs a chat client");
}

void Evaluator::check_config(const PipelineConfig& config) const {
  if (config.strategy == Strategy::kDefault) return;
  if (config.keyrank_enabled &&
      (res_.index == nullptr || res_.index->total_docs() == 0)) {
    throw ConfigError("strategy sek with KeyRank needs a non-empty corpus index");
  }
  if (config.max_keywords == 0) throw ConfigError("max_keywords must be >= 1");
}

GenerationRecord Evaluator::run_pipeline(const ProblemSpec& problem,
                                         const PipelineConfig& config) const {
  check_config(config);
  GenerationRecord rec;
  rec.task_id = problem.task_id;
  rec.strategy = config.strategy;

  const auto default_prompt =
      build_generation_prompt(problem, problem.description, res_.templates);
  std::string prompt = default_prompt;

  if (config.strategy == Strategy::kSek) {
    ExtractionPromptConfig ec;
    ec.guidelines_enabled = config.guidelines_enabled;
    ec.max_keywords = config.max_keywords;
    ec.demonstrations = res_.demonstrations;
    rec.extraction_prompt = build_extraction_prompt(problem, ec, res_.templates);

    std::optional<std::vector<Keyword>> keywords;
    try {
      // One retry on an unparseable answer; the retry skips the cache so
      // that it reaches the backend again.
      for (int attempt = 1; attempt <= 2 && !keywords; ++attempt) {
        const auto messages = user_message(*rec.extraction_prompt);
        const auto result = res_.client->complete(messages, config.completion,
                                                  CallOptions{attempt == 1});
        rec.extraction_attempts = attempt;
        rec.extraction_response = result.text;
        try {
          keywords = parse_keyword_response(result.text, config.max_keywords);
        } catch (const ParseFailure& e) {
          rec.warnings.push_back(
              fmt::format("extraction attempt {}: {}", attempt, e.what()));
        }
      }
    } catch (const Error& e) {
      rec.verdict = Verdict::kError;
      rec.failure_detail = fmt::format("keyword extraction failed: {}", e.what());
      return rec;
    }

    if (!keywords) {
      rec.fell_back_to_default = true;
      rec.warnings.push_back("keyword extraction unparseable; using default prompt");
    } else {
      rec.parsed_keywords = *keywords;
      try {
        auto ranked =
            config.keyrank_enabled
                ? rank_keywords(*keywords, problem, *res_.index, config.order_policy)
                : passthrough_keywords(*keywords, problem, res_.index);
        const auto enriched = enrich_problem(problem, ranked);
        rec.ranked_keywords = std::move(ranked);
        prompt = build_generation_prompt(problem, enriched.text, res_.templates);
      } catch (const Error& e) {
        rec.verdict = Verdict::kError;
        rec.failure_detail = fmt::format("keyword ranking failed: {}", e.what());
        return rec;
      }
    }
  }

  rec.enriched_prompt = prompt;
  try {
    const auto result =
        res_.client->complete(user_message(prompt), config.completion);
    rec.generation_response = result.text;
    auto code = extract_code(result.text, problem);
    rec.extracted_code = std::move(code.source);
    if (code.warning) rec.warnings.push_back(*code.warning);
  } catch (const Error& e) {
    rec.verdict = Verdict::kError;
    rec.failure_detail = fmt::format("generation failed: {}", e.what());
  }
  return rec;
}

Verdict Evaluator::evaluate_solution(GenerationRecord& record,
                                     const ProblemSpec& problem,
                                     const PipelineConfig& config) const {
  if (record.failure_detail && record.extracted_code.empty()) {
    record.verdict = Verdict::kError;
    return record.verdict;
  }
  if (res_.sandbox == nullptr) {
    record.verdict = Verdict::kError;
    record.failure_detail = "sandbox unavailable: no runner configured";
    return record.verdict;
  }
  SandboxVerdict v;
  try {
    v = res_.sandbox->execute(
        make_sandbox_request(problem, record.extracted_code, config.timeout_s));
  } catch (const Error& e) {
    record.verdict = Verdict::kError;
    record.failure_detail = e.what();
    return record.verdict;
  }
  record.verdict = v.status;
  record.failure_detail.reset();
  if (v.status != Verdict::kPass) {
    std::string detail;
    if (v.failed_case) detail = fmt::format("case {}", *v.failed_case);
    if (v.stderr_excerpt && !v.stderr_excerpt->empty()) {
      if (!detail.empty()) detail += ": ";
      detail += *v.stderr_excerpt;
    }
    if (!detail.empty()) record.failure_detail = std::move(detail);
  }
  return record.verdict;
}

EvalReport Evaluator::run_benchmark(std::span<const ProblemSpec> problems,
                                    const PipelineConfig& config,
                                    std::string_view benchmark_id,
                                    const RecordSink& sink) const {
  check_config(config);
  if (problems.empty()) throw ConfigError("no problems to evaluate");

  const std::size_t jobs = std::min(
      problems.size(), config.jobs != 0 ? config.jobs : res_.client->max_in_flight());
  std::vector<std::optional<GenerationRecord>> records(problems.size());
  std::vector<double> seconds(problems.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex flush_mu;
  std::size_t flushed = 0;

  const auto wall_start = std::chrono::steady_clock::now();
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < problems.size(); i = next.fetch_add(1)) {
      const auto t0 = std::chrono::steady_clock::now();
      GenerationRecord rec;
      try {
        rec = run_pipeline(problems[i], config);
        evaluate_solution(rec, problems[i], config);
      } catch (const std::exception& e) {
        rec.task_id = problems[i].task_id;
        rec.strategy = config.strategy;
        rec.verdict = Verdict::kError;
        rec.failure_detail = e.what();
      }
      seconds[i] = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0).count();

      std::lock_guard lock(flush_mu);
      records[i] = std::move(rec);
      while (flushed < records.size() && records[flushed]) {
        if (sink) sink(*records[flushed]);
        ++flushed;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  EvalReport report;
  report.benchmark = std::string(benchmark_id);
  report.config = config_snapshot(config);
  std::vector<Verdict> verdicts;
  for (const auto& rec : records) {
    report.results.push_back(
        {rec->task_id, rec->verdict, rec->failure_detail, rec->fell_back_to_default});
    verdicts.push_back(rec->verdict);
  }
  report.pass_at_1 = pass_at_1(verdicts);
  TimingStats t;
  t.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - wall_start).count();
  for (const double s : seconds) {
    t.mean_problem_seconds += s / static_cast<double>(seconds.size());
    t.max_problem_seconds = std::max(t.max_problem_seconds, s);
  }
  report.timing = t;
  return report;
}

AblationReport Evaluator::run_ablation(std::span<const ProblemSpec> problems,
                                       std::span<const PipelineConfig> variants,
                                       std::string_view benchmark_id,
                                       const RecordSink& sink) const {
  AblationReport out;
  for (const auto& v : variants) {
    AblationEntry entry;
    entry.name = v.name;
    try {
      entry.report = run_benchmark(problems, v, benchmark_id, sink);
    } catch (const std::exception& e) {
      spdlog::error("variant '{}' failed: {}", v.name, e.what());
      entry.error = e.what();
    }
    out.variants.push_back(std::move(entry));
  }
  return out;
}

std::vector<PipelineConfig> make_sweep(std::string_view sweep,
                                       const PipelineConfig& base) {
  std::vector<PipelineConfig> out;
  auto sek_base = base;
  sek_base.strategy = Strategy::kSek;

  auto add_orders = [&] {
    for (const auto p : kAllOrderPolicies) {
      auto c = sek_base;
      c.order_policy = p;
      c.name = std::string(to_string(p));
      out.push_back(std::move(c));
    }
  };
  auto add_guidelines = [&] {
    auto all = sek_base;
    all.guidelines_enabled = {true, true, true, true, true};
    all.name = "all_guidelines";
    out.push_back(all);
    for (std::size_t i = 0; i < kGuidelineCount; ++i) {
      auto c = all;
      c.guidelines_enabled[i] = false;
      c.name = fmt::format("without_guideline_{}", i + 1);
      out.push_back(std::move(c));
    }
  };
  auto add_keyrank = [&](bool include_on) {
    if (include_on) {
      auto on = sek_base;
      on.keyrank_enabled = true;
      on.name = "keyrank";
      out.push_back(std::move(on));
    }
    auto off = sek_base;
    off.keyrank_enabled = false;
    off.name = "no_keyrank";
    out.push_back(std::move(off));
  };

  if (sweep == "orders") {
    add_orders();
  } else if (sweep == "guidelines") {
    add_guidelines();
  } else if (sweep == "keyrank") {
    add_keyrank(true);
  } else if (sweep == "all") {
    auto d = base;
    d.strategy = Strategy::kDefault;
    d.name = "default";
    out.push_back(std::move(d));
    add_orders();
    add_guidelines();
    add_keyrank(false);
  } else {
    throw ConfigError(fmt::format(
        "unknown sweep '{}' (expected orders, guidelines, keyrank or all)", sweep));
  }
  return out;
}

std::vector<PipelineConfig> variants_from_json(const json& j,
                                               const PipelineConfig& base) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("variants file must be a non-empty JSON array");
  }
  std::vector<PipelineConfig> out;
  std::set<std::string> names;
  try {
    for (const auto& v : j) {
      PipelineConfig c = base;
      c.name = v.at("name").get<std::string>();
      if (!names.insert(c.name).second) {
        throw ConfigError(fmt::format("duplicate variant name '{}'", c.name));
      }
      if (auto it = v.find("strategy"); it != v.end()) {
        c.strategy = strategy_from_string(it->get<std::string>());
      }
      if (auto it = v.find("order"); it != v.end()) {
        c.order_policy = order_policy_from_string(it->get<std::string>());
      }
      if (auto it = v.find("keyrank"); it != v.end()) c.keyrank_enabled = it->get<bool>();
      if (auto it = v.find("guidelines"); it != v.end()) {
        c.guidelines_enabled = {false, false, false, false, false};
        for (const auto& g : *it) {
          const auto n = g.get<int>();
          if (n < 1 || n > static_cast<int>(kGuidelineCount)) {
            throw ConfigError(fmt::format("guideline {} out of range 1..5", n));
          }
          c.guidelines_enabled[static_cast<std::size_t>(n - 1)] = true;
        }
      }
      if (auto it = v.find("max_keywords"); it != v.end()) {
        c.max_keywords = it->get<std::size_t>();
      }
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed variants file: {}", e.what()));
  }
  return out;
}

}  // namespace sek
