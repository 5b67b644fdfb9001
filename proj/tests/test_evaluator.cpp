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

#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "sek/error.hpp"
#include "test_util.hpp"

using namespace sek;

namespace {

std::vector<ProblemSpec> humaneval() {
  return load_benchmark(testutil::fixture("humaneval10.jsonl"),
                        BenchmarkFormat::kHumanEvalJsonl);
}

CorpusIndex corpus() {
  return build_index(read_corpus_jsonl(testutil::fixture("corpus.jsonl"), {}));
}

std::string fenced(const std::string& code) {
  return "Here is the solution.\n```python\n" + code + "```\n";
}

const char* kCountNumsKeywords =
    "[leading sign]: For a negative number the first digit carries the sign, "
    "so -123 gives -1, 2 and 3.\n"
    "[sum of digits]: The total of the signed digits of a number.\n"
    "[count_nums]: Function returning how many elements have a sum of digits "
    "greater than 0.\n";

// Scripts the backend with the extraction answer and the generation answer
// expected for `problem` under `config`.
void script_sek(MockBackend& mock, const ProblemSpec& problem,
                const EvaluatorResources& res, const PipelineConfig& config,
                const std::string& extraction, const std::string& generation) {
  ExtractionPromptConfig ec;
  ec.guidelines_enabled = config.guidelines_enabled;
  ec.max_keywords = config.max_keywords;
  ec.demonstrations = res.demonstrations;
  mock.add(build_extraction_prompt(problem, ec, res.templates), extraction);
  const auto kws = parse_keyword_response(extraction, config.max_keywords);
  const auto ranked = config.keyrank_enabled
                          ? rank_keywords(kws, problem, *res.index, config.order_policy)
                          : passthrough_keywords(kws, problem, res.index);
  mock.add(build_generation_prompt(problem, enrich_problem(problem, ranked).text,
                                   res.templates),
           generation);
}

}  // namespace

TEST_CASE("pass@1 arithmetic") {
  using V = Verdict;
  const std::vector<V> half = {V::kPass, V::kFail, V::kPass, V::kFail};
  CHECK(pass_at_1(half).value() == 0.5);
  CHECK(pass_at_1(half) == PassRate{2, 4});
  const std::vector<V> all = {V::kPass, V::kPass};
  CHECK(pass_at_1(all).value() == 1.0);
  std::vector<V> he(164, V::kFail);
  std::fill(he.begin(), he.begin() + 140, V::kPass);
  CHECK(pass_at_1(he).value() == doctest::Approx(0.854).epsilon(0.001));
  CHECK_THROWS_AS(pass_at_1({}), ConfigError);

  std::mt19937 rng(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<V> vs(1 + rng() % 50);
    std::size_t passes = 0;
    for (auto& v : vs) {
      v = static_cast<V>(rng() % 4);
      if (v == V::kPass) ++passes;
    }
    const auto r = pass_at_1(vs);
    CHECK(r.passed == passes);
    CHECK(r.total == vs.size());
  }
}

TEST_CASE("sek pipeline on the count_nums flow") {
  const auto problems = humaneval();
  const auto& p = problems[2];
  REQUIRE(p.entry_point == std::optional<std::string>("count_nums"));
  const auto index = corpus();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  res.index = &index;
  PipelineConfig cfg;
  script_sek(*mock, p, res, cfg, kCountNumsKeywords,
             fenced(p.description + *p.canonical_solution));

  Evaluator ev(res);
  const auto rec = ev.run_pipeline(p, cfg);
  CHECK_FALSE(rec.failure_detail.has_value());
  CHECK(rec.extraction_attempts == 1);
  REQUIRE(rec.ranked_keywords.has_value());
  CHECK(rec.ranked_keywords->ordered.back().keyword.text == "count_nums");
  const auto buf = rec.enriched_prompt.find(kBufferPhrase);
  REQUIRE(buf != std::string::npos);
  CHECK(rec.enriched_prompt.find("[count_nums]: Function returning", buf) !=
        std::string::npos);
  CHECK(rec.extracted_code == p.description + *p.canonical_solution);
}

TEST_CASE("default strategy has no extraction fields") {
  const auto problems = humaneval();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  mock->add(build_generation_prompt(problems[0], problems[0].description),
            fenced("def has_close_elements(n, t): return False\n"));
  PipelineConfig cfg;
  cfg.strategy = Strategy::kDefault;
  const auto rec = Evaluator(res).run_pipeline(problems[0], cfg);
  CHECK_FALSE(rec.extraction_prompt.has_value());
  CHECK_FALSE(rec.extraction_response.has_value());
  CHECK_FALSE(rec.parsed_keywords.has_value());
  CHECK(rec.extraction_attempts == 0);
  CHECK(mock->call_count() == 1);
  const auto j = to_json(rec);
  CHECK(j["extraction_prompt"].is_null());
  CHECK(j["parsed_keywords"].is_null());
}

TEST_CASE("parse failure then a valid retry") {
  const auto problems = humaneval();
  const auto& p = problems[2];
  const auto index = corpus();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  res.index = &index;
  PipelineConfig cfg;
  script_sek(*mock, p, res, cfg, kCountNumsKeywords, fenced("pass\n"));
  ExtractionPromptConfig ec;
  const auto prompt = build_extraction_prompt(p, ec);
  mock->add_sequence(prompt, {"I cannot list keywords.", kCountNumsKeywords});

  const auto rec = Evaluator(res).run_pipeline(p, cfg);
  CHECK(rec.extraction_attempts == 2);
  CHECK_FALSE(rec.fell_back_to_default);
  REQUIRE(rec.parsed_keywords.has_value());
  CHECK(rec.parsed_keywords->size() == 3);
  CHECK(rec.parsed_keywords->front().text == "leading sign");
  REQUIRE_FALSE(rec.warnings.empty());
  CHECK(rec.warnings[0].find("extraction attempt 1") != std::string::npos);
}

TEST_CASE("two parse failures fall back to the default prompt") {
  const auto problems = humaneval();
  const auto& p = problems[2];
  const auto index = corpus();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  res.index = &index;
  mock->add(build_extraction_prompt(p, ExtractionPromptConfig{}), "nothing useful");
  mock->add(build_generation_prompt(p, p.description), fenced("pass\n"));
  const auto rec = Evaluator(res).run_pipeline(p, PipelineConfig{});
  CHECK(rec.extraction_attempts == 2);
  CHECK(rec.fell_back_to_default);
  CHECK(rec.enriched_prompt == build_generation_prompt(p, p.description));
  CHECK(rec.extracted_code == "pass\n");
}

TEST_CASE("backend failures are recorded, not thrown") {
  const auto problems = humaneval();
  const auto index = corpus();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  res.index = &index;
  const auto rec = Evaluator(res).run_pipeline(problems[0], PipelineConfig{});
  CHECK(rec.verdict == Verdict::kError);
  REQUIRE(rec.failure_detail.has_value());
  CHECK(rec.failure_detail->find("no mock response") != std::string::npos);
}

TEST_CASE("configuration errors") {
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  Evaluator ev(res);
  const auto problems = humaneval();
  CHECK_THROWS_AS(ev.run_pipeline(problems[0], PipelineConfig{}), ConfigError);
  PipelineConfig zero;
  zero.max_keywords = 0;
  zero.keyrank_enabled = false;
  CHECK_THROWS_AS(ev.run_pipeline(problems[0], zero), ConfigError);
  CHECK_THROWS_AS(Evaluator(EvaluatorResources{}), ConfigError);
}

TEST_CASE("evaluate_solution through the runner") {
  const auto cmd = testutil::mini_runner_command();
  if (cmd.empty()) {
    MESSAGE("python3 not found; skipping sandbox-backed checks");
    return;
  }
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  SandboxClient sandbox(cmd);
  EvaluatorResources res;
  res.client = &client;
  res.sandbox = &sandbox;
  Evaluator ev(res);
  const auto problems = humaneval();
  PipelineConfig cfg;

  for (const auto& p : problems) {
    GenerationRecord rec;
    rec.extracted_code = p.description + *p.canonical_solution;
    CHECK_MESSAGE(ev.evaluate_solution(rec, p, cfg) == Verdict::kPass, p.task_id);
  }
  const auto mutants = nlohmann::json::parse(
      testutil::read_file(testutil::fixture("humaneval10_mutants.json")));
  for (const auto& p : problems) {
    GenerationRecord rec;
    rec.extracted_code = p.description + mutants.at(p.task_id).get<std::string>();
    CHECK_MESSAGE(ev.evaluate_solution(rec, p, cfg) == Verdict::kFail, p.task_id);
  }
  GenerationRecord bad;
  bad.extracted_code = "def strlen(string):\n    raise RuntimeError('x')\n";
  CHECK(ev.evaluate_solution(bad, problems[8], cfg) == Verdict::kFail);
  CHECK(bad.failure_detail.has_value());

  cfg.timeout_s = 1.0;
  GenerationRecord loop;
  loop.extracted_code = "def strlen(string):\n    while True:\n        pass\n";
  const auto start = std::chrono::steady_clock::now();
  CHECK(ev.evaluate_solution(loop, problems[8], cfg) == Verdict::kTimeout);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
}

TEST_CASE("no runner means error verdicts") {
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  GenerationRecord rec;
  rec.extracted_code = "x";
  CHECK(Evaluator(res).evaluate_solution(rec, humaneval()[0], {}) == Verdict::kError);
  CHECK(rec.failure_detail->find("sandbox unavailable") != std::string::npos);
}

TEST_CASE("run_benchmark keeps order and streams records in order") {
  const auto problems = humaneval();
  auto mock = std::make_shared<MockBackend>();
  ClientOptions o;
  o.max_in_flight = 4;
  ChatClient client(mock, o);
  EvaluatorResources res;
  res.client = &client;
  PipelineConfig cfg;
  cfg.strategy = Strategy::kDefault;
  cfg.jobs = 4;
  for (const auto& p : problems) {
    mock->add(build_generation_prompt(p, p.description), fenced("pass\n"));
  }
  std::vector<std::string> seen;
  std::mutex mu;
  const auto report = Evaluator(res).run_benchmark(
      problems, cfg, "fixture", [&](const GenerationRecord& r) {
        std::lock_guard lock(mu);
        seen.push_back(r.task_id);
      });
  REQUIRE(report.results.size() == problems.size());
  REQUIRE(seen.size() == problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    CHECK(report.results[i].task_id == problems[i].task_id);
    CHECK(seen[i] == problems[i].task_id);
  }
  CHECK(report.has_errors());
  CHECK(report.pass_at_1 == PassRate{0, 10});

  CHECK(report.timing.has_value());
  auto untimed = report;
  untimed.timing.reset();
  const auto j = to_json(untimed);
  CHECK_FALSE(j.contains("timing"));
  CHECK(to_json(report_from_json(j)) == j);
  CHECK_FALSE(j["config"].contains("jobs"));
  const auto table = render_table(report);
  CHECK(table.find("fixture: Pass@1 = 0/10 = 0.00%") != std::string::npos);
}

TEST_CASE("sweeps") {
  PipelineConfig base;
  const auto orders = make_sweep("orders", base);
  REQUIRE(orders.size() == 4);
  CHECK(orders[0].name == "abs_gen_func");
  CHECK(orders[3].order_policy == OrderPolicy::kGenAbsFunc);

  const auto g = make_sweep("guidelines", base);
  REQUIRE(g.size() == 6);
  CHECK(g[0].name == "all_guidelines");
  CHECK(g[4].name == "without_guideline_4");
  CHECK_FALSE(g[4].guidelines_enabled[3]);
  CHECK(g[4].guidelines_enabled[2]);

  const auto k = make_sweep("keyrank", base);
  REQUIRE(k.size() == 2);
  CHECK(k[0].keyrank_enabled);
  CHECK_FALSE(k[1].keyrank_enabled);

  const auto all = make_sweep("all", base);
  // "all" carries a single KeyRank-off variant; KeyRank on is already
  // covered by the order and guideline variants.
  CHECK(all.size() == 1 + 4 + 6 + 1);
  CHECK(all.back().name == "no_keyrank");
  CHECK(all[0].strategy == Strategy::kDefault);
  CHECK_THROWS_AS(make_sweep("bogus", base), ConfigError);

  const auto v = variants_from_json(
      nlohmann::json::parse(R"([{"name":"a","order":"gen_abs_func"},
                                {"name":"b","keyrank":false,"guidelines":[1,2]}])"),
      base);
  REQUIRE(v.size() == 2);
  CHECK(v[0].order_policy == OrderPolicy::kGenAbsFunc);
  CHECK_FALSE(v[1].keyrank_enabled);
  CHECK(v[1].guidelines_enabled == std::array<bool, 5>{true, true, false, false, false});
  CHECK_THROWS_AS(variants_from_json(nlohmann::json::parse(R"([{"name":"a"},{"name":"a"}])"), base),
                  ConfigError);
}

TEST_CASE("order ablation changes only the keyword block order") {
  const auto problems = humaneval();
  const auto& p = problems[2];
  const auto index = corpus();
  auto mock = std::make_shared<MockBackend>();
  ChatClient client(mock);
  EvaluatorResources res;
  res.client = &client;
  res.index = &index;
  PipelineConfig base;
  std::vector<PipelineConfig> variants;
  for (const auto pol : {OrderPolicy::kAbsGenFunc, OrderPolicy::kGenAbsFunc}) {
    auto c = base;
    c.name = std::string(to_string(pol));
    c.order_policy = pol;
    script_sek(*mock, p, res, c, kCountNumsKeywords, fenced("pass\n"));
    variants.push_back(c);
  }
  std::vector<GenerationRecord> recs;
  const std::vector<ProblemSpec> one = {p};
  const auto ab = Evaluator(res).run_ablation(
      one, variants, "fixture", [&](const GenerationRecord& r) { recs.push_back(r); });
  REQUIRE(ab.variants.size() == 2);
  CHECK(ab.variants[0].report.has_value());
  REQUIRE(recs.size() == 2);
  const auto& a = recs[0].enriched_prompt;
  const auto& b = recs[1].enriched_prompt;
  CHECK(a != b);
  const auto cut = a.find(kBufferPhrase);
  REQUIRE(cut != std::string::npos);
  CHECK(a.substr(0, cut) == b.substr(0, cut));
  // Same entries, different sequence.
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
      auto nl = s.find('\n', pos);
      if (nl == std::string::npos) nl = s.size();
      out.push_back(s.substr(pos, nl - pos));
      pos = nl + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(lines(a) == lines(b));
  CHECK(a.size() == b.size());
}
