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

// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <tuple>
#include <algorithm>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "e2e_fixture.hpp"
#include "oracles.hpp"
#include "sek/benchmark_io.hpp"
#include "sek/corpus_index.hpp"
#include "sek/evaluator.hpp"
#include "sek/keyrank.hpp"
#include "sek/prompt_pipeline.hpp"
#include "sek/sandbox.hpp"
#include "test_util.hpp"

namespace {

using namespace sek;
using Clock = std::chrono::steady_clock;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::kSkip, std::move(d)}; }

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

oracle::Cat to_oracle(Category c) {
  switch (c) {
    case Category::kAbstract: return oracle::Cat::kAbs;
    case Category::kGeneral: return oracle::Cat::kGen;
    case Category::kFunction: return oracle::Cat::kFunc;
  }
  return oracle::Cat::kAbs;
}

// One randomized KeyRank instance: at most 8 keywords, at most 40
// description tokens, at most 10 corpus documents.
struct Instance {
  ProblemSpec problem;
  std::vector<std::string> docs;
  std::vector<Keyword> keywords;
  std::vector<std::string> raw;
};

Instance random_instance(std::mt19937& rng) {
  static const std::vector<std::string> vocab = {
      "sum", "of", "digits", "even", "odd", "list", "count", "number",
      "string", "solve", "Sum", "prime", "x_1", "value"};
  Instance in;
  const auto dlen = 1 + rng() % 40;
  std::string d = "def solve(x):\n    ";
  std::size_t written = 3;  // def, solve, x
  for (; written < dlen; ++written) {
    d += vocab[rng() % vocab.size()];
    d += rng() % 6 == 0 ? ", " : " ";
  }
  in.problem.task_id = "rand";
  in.problem.description = d;
  in.problem.entry_point = "solve";
  for (std::size_t i = 0, n = 1 + rng() % 10; i < n; ++i) {
    std::string doc;
    for (std::size_t j = 0, m = rng() % 15; j < m; ++j) {
      doc += vocab[rng() % vocab.size()] + " ";
    }
    in.docs.push_back(doc);
  }
  for (std::size_t i = 0, n = rng() % 9; i < n; ++i) {
    std::string k;
    const auto kind = rng() % 6;
    if (kind == 0) {
      k = "solve";
    } else if (kind == 1) {
      k = "abstract notion " + std::to_string(rng() % 3);
    } else {
      for (std::size_t j = 0, m = 1 + rng() % 3; j < m; ++j) {
        if (j) k += ' ';
        k += vocab[rng() % vocab.size()];
      }
    }
    in.raw.push_back(k);
    in.keywords.push_back(Keyword{k, "explanation " + std::to_string(i)});
  }
  return in;
}

Outcome keyrank_oracle_and_algorithm(bool algorithm_only) {
  std::mt19937 rng(20260101);
  const int kInstances = 1200;
  const auto start = Clock::now();
  std::size_t checked_orders = 0;
  for (int it = 0; it < kInstances; ++it) {
    const auto in = random_instance(rng);
    const auto index = build_index(in.docs);
    for (const auto pol : kAllOrderPolicies) {
      const auto got = rank_keywords(in.keywords, in.problem, index, pol);
      if (!algorithm_only) {
        const auto b = block_order(pol);
        const oracle::Cat ob[3] = {to_oracle(b[0]), to_oracle(b[1]), to_oracle(b[2])};
        const auto want = oracle::rank(in.raw, in.problem.description, "solve",
                                       in.docs, kDefaultMaxN, ob);
        if (got.size() != want.size()) {
          return fail("instance " + std::to_string(it) + ": size mismatch");
        }
        for (std::size_t i = 0; i < want.size(); ++i) {
          if (got.ordered[i].keyword.text != want[i].text ||
              to_oracle(got.ordered[i].category) != want[i].cat ||
              got.ordered[i].score != want[i].score) {
            return fail("instance " + std::to_string(it) + ": order differs at " +
                        std::to_string(i));
          }
        }
        ++checked_orders;
        continue;
      }
      if (pol != OrderPolicy::kAbsGenFunc) continue;
      // Abstract block first, general block non-increasing, function last
      // with score -1.
      int phase = 0;  // 0 abstract, 1 general, 2 function
      std::optional<double> last_general;
      for (const auto& ck : got.ordered) {
        const int p = ck.category == Category::kAbstract  ? 0
                      : ck.category == Category::kGeneral ? 1
                                                          : 2;
        if (p < phase) return fail("instance " + std::to_string(it) + ": block order");
        phase = p;
        if (p == 0 && ck.score) return fail("abstract keyword carries a score");
        if (p == 1) {
          if (!ck.score) return fail("general keyword without score");
          if (last_general && *ck.score > *last_general) {
            return fail("instance " + std::to_string(it) + ": general block increases");
          }
          last_general = ck.score;
        }
        if (p == 2 && ck.score != std::optional<double>(kFunctionKeywordScore)) {
          return fail("function keyword score is not -1");
        }
      }
      ++checked_orders;
    }
  }
  const double took = seconds_since(start);
  if (!algorithm_only && took >= 10.0) {
    return fail("took " + std::to_string(took) + "s (limit 10s)");
  }
  std::ostringstream d;
  d << kInstances << " instances, " << checked_orders << " rankings checked in "
    << took << "s";
  return pass(d.str());
}

Outcome tfidf_fidelity() {
  // Description: the keyword repeated `reps` times, each copy followed by a
  // filler token, then `extra` fillers. n_i = reps and the gram count is
  // len - m + 1 by construction.
  int cases = 0;
  bool saw_log1 = false;
  bool saw_df0 = false;
  double worst = 0.0;
  const std::vector<std::string> keywords = {"sum", "sum of digits", "even digits",
                                             "a b c d", "prime"};
  for (const auto& k : keywords) {
    const std::size_t m = oracle::words(k).size();
    for (const auto& [reps, extra, docs, df] :
         std::vector<std::tuple<std::size_t, std::size_t, std::uint64_t, std::uint64_t>>{
             {1, 0, 3, 1}, {1, 3, 3, 2}, {2, 1, 10, 0}, {3, 4, 100, 0}, {1, 9, 7, 6},
             {4, 0, 50, 10}, {2, 7, 2, 1}, {5, 5, 1000, 999}, {1, 1, 4, 0}, {3, 2, 9, 4}}) {
      std::string desc;
      for (std::size_t r = 0; r < reps; ++r) desc += k + " zz ";
      for (std::size_t e = 0; e < extra; ++e) desc += "zz ";
      const std::size_t len = reps * (m + 1) + extra;
      ProblemSpec p;
      p.description = desc;
      CorpusIndex::DfMap map;
      if (df > 0) map.emplace(normalize_phrase(k), df);
      map.emplace("unrelated", 1);
      const CorpusIndex idx(docs, kDefaultMaxN, map);
      const double expected =
          static_cast<double>(reps) / static_cast<double>(len - m + 1) *
          std::log(static_cast<double>(docs) / (1.0 + static_cast<double>(df)));
      const double got = tfidf(Keyword{k, ""}, p, idx);
      worst = std::max(worst, std::abs(got - expected));
      if (std::abs(got - expected) > 1e-9) {
        return fail("case '" + k + "' off by " + std::to_string(got - expected));
      }
      saw_log1 = saw_log1 || docs == df + 1;
      saw_df0 = saw_df0 || df == 0;
      ++cases;
    }
  }
  if (cases != 50 || !saw_log1 || !saw_df0) return fail("case table incomplete");
  std::ostringstream d;
  d << cases << " cases, max abs error " << worst << " (log(1)=0 and df=0 included)";
  return pass(d.str());
}

Outcome ablation_orders() {
  ProblemSpec p;
  p.description = "def f(x):\n    return the sum of digits of x\n";
  p.entry_point = "f";
  const CorpusIndex idx(4, kDefaultMaxN, {{"sum of digits", 1}});
  const std::vector<Keyword> ks = {{"f", "fn"}, {"sum of digits", "gen"},
                                   {"digit arithmetic", "abs"}};
  const std::map<OrderPolicy, std::vector<std::string>> expected = {
      {OrderPolicy::kAbsGenFunc, {"digit arithmetic", "sum of digits", "f"}},
      {OrderPolicy::kFuncAbsGen, {"f", "digit arithmetic", "sum of digits"}},
      {OrderPolicy::kGenFuncAbs, {"sum of digits", "f", "digit arithmetic"}},
      {OrderPolicy::kGenAbsFunc, {"sum of digits", "digit arithmetic", "f"}},
  };
  std::set<std::vector<std::string>> distinct;
  for (const auto pol : kAllOrderPolicies) {
    std::vector<std::string> got;
    for (const auto& ck : rank_keywords(ks, p, idx, pol).ordered) {
      got.push_back(ck.keyword.text);
    }
    if (got != expected.at(pol)) return fail(std::string(to_string(pol)) + " wrong");
    distinct.insert(got);
  }
  if (distinct.size() != 4) return fail("permutations not distinct");
  return pass("4 policies, 4 distinct block permutations");
}

Outcome prompt_round_trip() {
  if (kBufferPhrase !=
      "Analyze the following key terms and their relationships within the "
      "problem context:") {
    return fail("buffer phrase differs");
  }
  std::mt19937 rng(500);
  const std::string tc = "abcXYZ _-()[]\\:.,09/";
  const std::string ec = "abc xyz[]:.,-()\\09";
  for (int it = 0; it < 500; ++it) {
    std::vector<Keyword> ks;
    for (std::size_t i = 0, n = 1 + rng() % 5; i < n; ++i) {
      Keyword k;
      k.text = "k";
      for (std::size_t j = 0, m = rng() % 10; j < m; ++j) k.text += tc[rng() % tc.size()];
      k.text += "k";
      k.explanation = "e";
      for (std::size_t j = 0, m = rng() % 30; j < m; ++j) {
        k.explanation += ec[rng() % ec.size()];
      }
      k.explanation += "e";
      ks.push_back(k);
    }
    if (parse_keyword_response(render_keywords(ks), ks.size()) != ks) {
      return fail("round trip failed on list " + std::to_string(it));
    }
  }
  // Golden files shared with the prompt unit tests.
  ProblemSpec p;
  p.description =
      "\ndef count_nums(arr):\n"
      "    \"\"\"\n"
      "    Write a function count_nums which takes an array of integers and "
      "returns\n"
      "    the number of elements which has a sum of digits > 0.\n"
      "    If a number is negative, then its first signed digit will be "
      "negative:\n"
      "    e.g. -123 has signed digits -1, 2, and 3.\n"
      "    \"\"\"\n";
  RankedKeywords r;
  r.ordered = {
      {{"signed digit", "The first digit of a negative number carries the "
                        "minus sign, so -123 contributes -1, 2 and 3."},
       Category::kAbstract, std::nullopt},
      {{"sum of digits", "The total of all signed digits of a number."},
       Category::kGeneral, 0.42},
      {{"count_nums", "Function that returns how many elements have a sum of "
                      "digits greater than zero."},
       Category::kFunction, -1.0},
  };
  const auto golden = testutil::read_file(testutil::fixture("golden/enriched_count_nums.txt"));
  if (golden.empty() || enrich_problem(p, r).text != golden) {
    return fail("enriched_count_nums.txt differs");
  }
  p.description = "Return the n-th nonagonal number.";
  const auto golden2 = testutil::read_file(testutil::fixture("golden/enriched_no_newline.txt"));
  if (golden2.empty() || enrich_problem(p, r).text != golden2) {
    return fail("enriched_no_newline.txt differs");
  }
  if (golden.find(kBufferPhrase) == std::string::npos) return fail("phrase missing");
  return pass("500 lists, 2 golden files, buffer phrase exact");
}

int run_cli(const std::vector<std::string>& args, std::string* out) {
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::dispatch(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome deterministic_end_to_end() {
  testutil::TempDir dir;
  const auto files = testutil::write_e2e_fixture(dir.path());
  const auto runner = testutil::mini_runner_command();
  const std::string runner_flag =
      runner.empty() ? "sek-definitely-missing-runner" : runner[0] + " " + runner[1];
  const auto start = Clock::now();
  std::vector<std::string> reports;
  for (const std::string jobs : {"1", "1", "1", "4", "4", "4"}) {
    std::string out;
    run_cli({"run", "--benchmark", files.benchmark.string(), "--backend",
             files.mock.string(), "--index", files.index.string(), "--runner",
             runner_flag, "--jobs", jobs},
            &out);
    if (out.empty()) return fail("no report produced");
    reports.push_back(out);
  }
  const double took = seconds_since(start);
  for (const auto& r : reports) {
    if (r != reports.front()) return fail("reports differ between runs");
  }
  const auto j = nlohmann::json::parse(reports.front());
  if (j["problems"].size() != 10) return fail("expected 10 results");
  if (took >= 30.0) return fail("took " + std::to_string(took) + "s (limit 30s)");
  std::ostringstream d;
  d << "6 runs (3 x jobs=1, 3 x jobs=4) byte-identical, Pass@1 "
    << j["pass_at_1"]["passed"] << "/" << j["pass_at_1"]["total"]
    << (runner.empty() ? " (no runner: all error)" : "") << ", " << took << "s";
  return pass(d.str());
}

Outcome pass_at_1_arithmetic() {
  using V = Verdict;
  const std::vector<V> half = {V::kPass, V::kFail, V::kPass, V::kFail};
  if (pass_at_1(half).value() != 0.5) return fail("2 of 4 is not 0.5");
  std::mt19937 rng(14);
  for (int i = 0; i < 1000; ++i) {
    std::vector<V> vs(1 + rng() % 200);
    std::size_t passed = 0;
    for (auto& v : vs) {
      v = static_cast<V>(rng() % 4);
      passed += v == V::kPass;
    }
    const auto r = pass_at_1(vs);
    if (r.passed != passed || r.total != vs.size() ||
        r.value() != static_cast<double>(passed) / static_cast<double>(vs.size())) {
      return fail("recount mismatch on vector " + std::to_string(i));
    }
  }
  return pass("2/4 = 0.5 exact, 1000 random vectors recounted");
}

Outcome demonstration_selection() {
  const auto he = load_benchmark(testutil::fixture("humaneval10.jsonl"),
                                 BenchmarkFormat::kHumanEvalJsonl);
  if (select_demonstration_indices(he, Benchmark::kHumanEval) !=
      std::vector<std::size_t>{0, 1}) {
    return fail("humaneval");
  }
  const auto mb = load_benchmark(testutil::fixture("mbpp3.jsonl"), BenchmarkFormat::kMbppJsonl);
  if (select_demonstration_indices(mb, Benchmark::kMbpp) != std::vector<std::size_t>{0}) {
    return fail("mbpp");
  }
  const auto apps = load_benchmark(testutil::fixture("apps"), BenchmarkFormat::kAppsDir);
  // Oracle: order the first five by (length, position) and keep two.
  std::vector<std::pair<std::size_t, std::size_t>> by_len;
  for (std::size_t i = 0; i < 5; ++i) by_len.emplace_back(apps[i].description.size(), i);
  std::sort(by_len.begin(), by_len.end());
  std::vector<std::size_t> want = {by_len[0].second, by_len[1].second};
  std::sort(want.begin(), want.end());
  if (select_demonstration_indices(apps, Benchmark::kApps) != want) return fail("apps fixture");

  std::vector<ProblemSpec> synth;
  for (const std::size_t len : {90, 40, 70, 60, 100}) {
    ProblemSpec p;
    p.description = std::string(len, 'q');
    synth.push_back(p);
  }
  if (select_demonstration_indices(synth, Benchmark::kApps) != std::vector<std::size_t>{1, 3}) {
    return fail("apps lengths [90,40,70,60,100]");
  }
  return pass("humaneval [0,1], mbpp [0], apps fixture and [90,40,70,60,100] -> [1,3]");
}

Outcome live_smoke() {
  const char* endpoint = std::getenv("SEK_LIVE_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    return skip("SEK_LIVE_ENDPOINT not set");
  }
  std::string out;
  const char* model = std::getenv("SEK_LIVE_MODEL");
  const int code = run_cli({"extract", "--benchmark",
                            testutil::fixture("humaneval10.jsonl").string(), "--task-id",
                            "HumanEval/2", "--backend", "openai", "--endpoint", endpoint,
                            "--model", model ? model : "gpt-3.5-turbo"},
                           &out);
  if (code != 0) return fail("extract against the live endpoint failed");
  return pass("extracted " + std::to_string(std::count(out.begin(), out.end(), '[')) +
              " keywords from the live endpoint");
}

Outcome sandbox_correctness() {
  std::string cmdline = "sek-sandbox-runner";
  if (const char* env = std::getenv("SEK_RUNNER"); env && *env) cmdline = env;
  const SandboxClient client(split_command(cmdline));
  if (!client.available()) return skip("runner '" + cmdline + "' not available");

  const auto he = load_benchmark(testutil::fixture("humaneval10.jsonl"),
                                 BenchmarkFormat::kHumanEvalJsonl);
  const auto mutants = nlohmann::json::parse(
      testutil::read_file(testutil::fixture("humaneval10_mutants.json")));
  for (const auto& p : he) {
    auto v = client.execute(make_sandbox_request(p, p.description + *p.canonical_solution, 10));
    if (v.status != Verdict::kPass) return fail(p.task_id + " canonical did not pass");
    v = client.execute(make_sandbox_request(
        p, p.description + mutants.at(p.task_id).get<std::string>(), 10));
    if (v.status != Verdict::kFail) return fail(p.task_id + " mutant did not fail");
  }
  const auto start = Clock::now();
  const auto v = client.execute(make_sandbox_request(
      he[8], "import time\ndef strlen(string):\n    time.sleep(10 ** 6)\n", 2.0));
  const double took = seconds_since(start);
  if (v.status != Verdict::kTimeout) return fail("sleep-forever did not time out");
  if (took > 3.0) return fail("timeout took " + std::to_string(took) + "s");
  const auto apps = load_benchmark(testutil::fixture("apps"), BenchmarkFormat::kAppsDir);
  const auto w = client.execute(make_sandbox_request(
      apps[0], "a, b = map(int, input().split())\nprint(a + b, '  ')\n", 10));
  if (w.status != Verdict::kPass) return fail("stdio whitespace case");
  return pass("10 canonical pass, 10 mutants fail, timeout in " + std::to_string(took) +
              "s, stdio whitespace ok");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"[PRIMARY] KeyRank oracle equivalence", [] { return keyrank_oracle_and_algorithm(false); }},
      {"[PRIMARY] TF-IDF numeric fidelity", tfidf_fidelity},
      {"[PRIMARY] KeyRank procedure fidelity", [] { return keyrank_oracle_and_algorithm(true); }},
      {"[PRIMARY] Ablation orders", ablation_orders},
      {"[PRIMARY] Prompt round-trip", prompt_round_trip},
      {"[PRIMARY] Deterministic end-to-end", deterministic_end_to_end},
      {"[PRIMARY] Pass@1 arithmetic", pass_at_1_arithmetic},
      {"[PRIMARY] Demonstration selection", demonstration_selection},
      {"[OPTIONAL] Live backend smoke", live_smoke},
      {"[SECONDARY] Sandbox correctness", sandbox_correctness},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::kPass ? "PASS"
                      : o.status == Status::kFail ? "FAIL"
                                                  : "SKIP";
    failures += o.status == Status::kFail;
    std::cout << tag << "  " << name << " -- " << o.detail << "\n";
  }
  std::cout << (failures == 0 ? "acceptance: all criteria met\n"
                              : "acceptance: " + std::to_string(failures) + " failed\n");
  return failures == 0 ? 0 : 1;
}
