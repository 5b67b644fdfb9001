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

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sek/benchmark_io.hpp"
#include "sek/corpus_index.hpp"
#include "sek/error.hpp"
#include "sek/evaluator.hpp"
#include "sek/keyrank.hpp"
#include "sek/llm_client.hpp"
#include "sek/prompt_pipeline.hpp"
#include "sek/sandbox.hpp"

namespace sek::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("{}: cannot write file", path.string()));
  out << data;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// ---------------------------------------------------------------------------
// Options shared by several subcommands. Flags override environment
// variables, which override the config file.

struct BackendFlags {
  std::string backend;  // "openai" or a mock fixture path
  std::string config_file;
  std::string endpoint;
  std::string model;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::optional<std::size_t> concurrency;
  std::string cache_dir;
};

struct Effective {
  std::string backend;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "mock";
  double temperature = 0.0;
  int max_tokens = 2048;
  std::size_t concurrency = 4;
  std::string cache_dir;
  std::string api_key;
};

Effective resolve(const BackendFlags& f) {
  Effective e;
  std::map<std::string, std::string> source;
  auto mark = [&](const char* key, const char* from) { source[key] = from; };

  if (!f.config_file.empty()) {
    json c;
    try {
      c = json::parse(read_text(f.config_file));
    } catch (const json::parse_error& ex) {
      throw ConfigError(fmt::format("{}: invalid JSON: {}", f.config_file, ex.what()));
    }
    auto take = [&](const char* key, auto& slot) {
      if (auto it = c.find(key); it != c.end() && !it->is_null()) {
        it->get_to(slot);
        mark(key, "file");
      }
    };
    take("backend", e.backend);
    take("endpoint", e.endpoint);
    take("model", e.model);
    take("temperature", e.temperature);
    take("max_tokens", e.max_tokens);
    take("concurrency", e.concurrency);
    take("cache_dir", e.cache_dir);
  }

  if (auto v = env("SEK_BACKEND")) { e.backend = *v; mark("backend", "env"); }
  if (auto v = env("SEK_ENDPOINT")) { e.endpoint = *v; mark("endpoint", "env"); }
  if (auto v = env("SEK_MODEL")) { e.model = *v; mark("model", "env"); }
  if (auto v = env("SEK_TEMPERATURE")) { e.temperature = std::stod(*v); mark("temperature", "env"); }
  if (auto v = env("SEK_MAX_TOKENS")) { e.max_tokens = std::stoi(*v); mark("max_tokens", "env"); }
  if (auto v = env("SEK_CONCURRENCY")) { e.concurrency = std::stoul(*v); mark("concurrency", "env"); }
  if (auto v = env("SEK_CACHE_DIR")) { e.cache_dir = *v; mark("cache_dir", "env"); }
  if (auto v = env("SEK_API_KEY")) {
    e.api_key = *v;
  } else if (auto o = env("OPENAI_API_KEY")) {
    e.api_key = *o;
  }

  if (!f.backend.empty()) { e.backend = f.backend; mark("backend", "flag"); }
  if (!f.endpoint.empty()) { e.endpoint = f.endpoint; mark("endpoint", "flag"); }
  if (!f.model.empty()) { e.model = f.model; mark("model", "flag"); }
  if (f.temperature) { e.temperature = *f.temperature; mark("temperature", "flag"); }
  if (f.max_tokens) { e.max_tokens = *f.max_tokens; mark("max_tokens", "flag"); }
  if (f.concurrency) { e.concurrency = *f.concurrency; mark("concurrency", "flag"); }
  if (!f.cache_dir.empty()) { e.cache_dir = f.cache_dir; mark("cache_dir", "flag"); }

  if (e.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (e.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (e.concurrency == 0) throw ConfigError("concurrency must be >= 1");

  auto src = [&](const char* key) {
    auto it = source.find(key);
    return it == source.end() ? std::string("default") : it->second;
  };
  spdlog::info("config: backend={} ({})", e.backend.empty() ? "<none>" : e.backend, src("backend"));
  spdlog::info("config: endpoint={} ({})", e.endpoint, src("endpoint"));
  spdlog::info("config: model={} ({})", e.model, src("model"));
  spdlog::info("config: temperature={} ({})", e.temperature, src("temperature"));
  spdlog::info("config: max_tokens={} ({})", e.max_tokens, src("max_tokens"));
  spdlog::info("config: concurrency={} ({})", e.concurrency, src("concurrency"));
  spdlog::info("config: cache_dir={} ({})", e.cache_dir.empty() ? "<memory>" : e.cache_dir,
               src("cache_dir"));
  spdlog::info("config: api_key={}", e.api_key.empty() ? "<unset>" : "<set>");
  return e;
}

std::unique_ptr<ChatClient> make_client(const Effective& e) {
  if (e.backend.empty()) {
    throw ConfigError("no backend: pass --backend openai or --backend <mock.json>");
  }
  std::shared_ptr<Backend> backend;
  if (e.backend == "openai") {
    OpenAIConfig oc;
    oc.endpoint = e.endpoint;
    oc.api_key = e.api_key;
    backend = std::make_shared<OpenAIBackend>(oc);
  } else {
    backend = MockBackend::from_file(e.backend);
  }
  ClientOptions opts;
  opts.max_in_flight = e.concurrency;
  if (!e.cache_dir.empty()) opts.cache_dir = fs::path(e.cache_dir);
  return std::make_unique<ChatClient>(std::move(backend), std::move(opts));
}

CompletionParams completion_params(const Effective& e) {
  CompletionParams p;
  p.model = e.model;
  p.temperature = e.temperature;
  p.max_tokens = e.max_tokens;
  return p;
}

void add_backend_flags(CLI::App* app, BackendFlags& f) {
  app->add_option("--backend", f.backend, "'openai' or path to a mock fixture JSON");
  app->add_option("--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--endpoint", f.endpoint, "Chat-completions endpoint URL");
  app->add_option("--model", f.model, "Model name");
  app->add_option("--temperature", f.temperature, "Sampling temperature (0 = greedy)");
  app->add_option("--max-tokens", f.max_tokens, "Maximum output tokens");
  app->add_option("--concurrency", f.concurrency, "Maximum in-flight requests");
  app->add_option("--cache-dir", f.cache_dir, "On-disk response cache directory");
}

struct ProblemFlags {
  std::string benchmark;
  std::string format;
  std::string task_id;
  std::string problem_file;
  std::string function_name;
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--benchmark", f.benchmark, "Benchmark file or APPS directory");
  app->add_option("--format", f.format, "humaneval_jsonl, mbpp_jsonl or apps_dir (default: detect)");
  app->add_option("--task-id", f.task_id, "Problem to use from --benchmark");
  app->add_option("--problem", f.problem_file, "Plain-text problem description");
  app->add_option("--function-name", f.function_name, "Entry point for a --problem file");
}

BenchmarkFormat format_for(const std::string& path, const std::string& flag) {
  return flag.empty() ? detect_format(path) : benchmark_format_from_string(flag);
}

ProblemSpec load_one_problem(const ProblemFlags& f) {
  if (!f.problem_file.empty()) {
    ProblemSpec p;
    p.task_id = fs::path(f.problem_file).stem().string();
    p.description = read_text(f.problem_file);
    if (p.description.empty()) throw InputError("problem file is empty");
    if (!f.function_name.empty()) p.entry_point = f.function_name;
    return p;
  }
  if (f.benchmark.empty()) throw ConfigError("pass --problem or --benchmark with --task-id");
  const auto problems = load_benchmark(f.benchmark, format_for(f.benchmark, f.format));
  if (f.task_id.empty()) throw ConfigError("--task-id is required with --benchmark");
  for (const auto& p : problems) {
    if (p.task_id == f.task_id) return p;
  }
  throw InputError(fmt::format("task '{}' not in {}", f.task_id, f.benchmark));
}

std::array<bool, kGuidelineCount> parse_guidelines(const std::string& spec) {
  std::array<bool, kGuidelineCount> g{};
  if (spec.empty() || spec == "all") return {true, true, true, true, true};
  if (spec == "none") return g;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int n = 0;
    try {
      n = std::stoi(tok);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("bad guideline '{}'", tok));
    }
    if (n < 1 || n > static_cast<int>(kGuidelineCount)) {
      throw ConfigError(fmt::format("guideline {} out of range 1..5", n));
    }
    g[static_cast<std::size_t>(n - 1)] = true;
  }
  return g;
}

struct SekFlags {
  std::string order = "abs_gen_func";
  bool no_keyrank = false;
  std::string guidelines = "all";
  std::size_t max_keywords = kDefaultMaxKeywords;
  std::string index;
  std::string demos;
  std::string demo_source;
  std::string demo_format;
  std::string templates;
};

void add_sek_flags(CLI::App* app, SekFlags& f) {
  app->add_option("--order", f.order, "abs_gen_func, func_abs_gen, gen_func_abs or gen_abs_func")
      ->capture_default_str();
  app->add_flag("--no-keyrank", f.no_keyrank, "Keep keywords in extraction order");
  app->add_option("--guidelines", f.guidelines, "Enabled guidelines, e.g. 1,2,4 (or all / none)")
      ->capture_default_str();
  app->add_option("--max-keywords", f.max_keywords, "Keyword cap")->capture_default_str();
  app->add_option("--index", f.index, "Corpus index built by `sek index`");
  app->add_option("--demos", f.demos, "JSONL of {task_id, keywords_block} for demonstrations");
  app->add_option("--demo-source", f.demo_source,
                  "Benchmark the demonstrations are selected from (default: --benchmark)");
  app->add_option("--demo-format", f.demo_format, "Format of --demo-source");
  app->add_option("--templates", f.templates, "Directory of prompt templates");
}

PromptTemplates templates_for(const SekFlags& f) {
  return f.templates.empty() ? default_templates() : load_templates(f.templates);
}

std::vector<Demonstration> demonstrations_for(const SekFlags& f,
                                              const std::string& benchmark,
                                              const std::string& format) {
  if (f.demos.empty()) return {};
  const auto source = f.demo_source.empty() ? benchmark : f.demo_source;
  if (source.empty()) throw ConfigError("--demos needs --demo-source or --benchmark");
  const auto fmt_flag = f.demo_source.empty() ? format : f.demo_format;
  const auto bf = format_for(source, fmt_flag);
  const auto problems = load_benchmark(source, bf);
  return select_demonstrations(problems, benchmark_of(bf), load_demo_blocks(f.demos));
}

std::optional<CorpusIndex> index_for(const SekFlags& f, bool required) {
  if (f.index.empty()) {
    if (required) throw ConfigError("--index is required unless --no-keyrank is given");
    return std::nullopt;
  }
  return CorpusIndex::load(f.index);
}

// ---------------------------------------------------------------------------

int cmd_index(const std::string& corpus, const std::string& text_field,
              const std::string& lang_field, const std::string& lang,
              std::size_t max_n, const std::string& out_path, std::ostream& out) {
  CorpusReadOptions ro;
  ro.text_field = text_field;
  if (!lang_field.empty()) ro.lang_field = lang_field;
  ro.lang_value = lang;
  const auto docs = read_corpus_jsonl(corpus, ro);
  const auto index = build_index(docs, max_n);
  index.save(out_path);
  out << fmt::format("indexed {} documents, {} n-grams (max_n={}) -> {}\n",
                     index.total_docs(), index.size(), index.max_n(), out_path);
  return kExitOk;
}

std::vector<Keyword> extract_keywords(const ProblemSpec& problem, const SekFlags& sf,
                                      const BackendFlags& bf, const ProblemFlags& pf,
                                      std::string* prompt_out) {
  const auto eff = resolve(bf);
  auto client = make_client(eff);
  ExtractionPromptConfig ec;
  ec.guidelines_enabled = parse_guidelines(sf.guidelines);
  ec.max_keywords = sf.max_keywords;
  ec.demonstrations = demonstrations_for(sf, pf.benchmark, pf.format);
  const auto prompt = build_extraction_prompt(problem, ec, templates_for(sf));
  if (prompt_out) *prompt_out = prompt;
  const std::vector<Message> messages{{"user", prompt}};
  const auto r = client->complete(messages, completion_params(eff));
  return parse_keyword_response(r.text, sf.max_keywords);
}

std::string format_ranked(const RankedKeywords& ranked) {
  std::string s;
  for (const auto& ck : ranked.ordered) {
    s += fmt::format("{}\t{}\t{}\n", to_string(ck.category),
                     ck.score ? fmt::format("{:.6f}", *ck.score) : std::string("-"),
                     ck.keyword.text);
  }
  return s;
}

struct RunFlags {
  ProblemFlags problem;
  BackendFlags backend;
  SekFlags sek;
  std::string strategy = "sek";
  std::string ids;
  double timeout = kDefaultTimeoutSeconds;
  std::size_t jobs = 0;
  std::string out;
  std::string records;
  std::string runner;
  bool timing = false;
  // ablate only
  std::string sweep;
  std::string variants;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--benchmark", f.problem.benchmark, "Benchmark file or APPS directory")
      ->required();
  app->add_option("--format", f.problem.format, "humaneval_jsonl, mbpp_jsonl or apps_dir");
  app->add_option("--strategy", f.strategy, "default or sek")->capture_default_str();
  app->add_option("--ids", f.ids, "File of task ids to evaluate");
  app->add_option("--timeout", f.timeout, "Per-candidate timeout in seconds")
      ->capture_default_str();
  app->add_option("--jobs", f.jobs, "Worker threads (default: --concurrency)");
  app->add_option("--out", f.out, "Write the report JSON here instead of stdout");
  app->add_option("--records", f.records, "Append GenerationRecords to this JSONL file");
  app->add_option("--runner", f.runner, "Sandbox runner command (default: $SEK_RUNNER)");
  app->add_flag("--timing", f.timing, "Include wall-clock statistics in the report");
  add_backend_flags(app, f.backend);
  add_sek_flags(app, f.sek);
}

struct RunSetup {
  std::vector<ProblemSpec> problems;
  std::string benchmark_id;
  std::unique_ptr<ChatClient> client;
  std::optional<CorpusIndex> index;
  std::optional<SandboxClient> sandbox;
  PipelineConfig base;
  std::vector<Demonstration> demos;
  PromptTemplates templates;
};

RunSetup prepare_run(const RunFlags& f, bool need_index) {
  RunSetup s;
  const auto bf = format_for(f.problem.benchmark, f.problem.format);
  s.problems = load_benchmark(f.problem.benchmark, bf);
  if (!f.ids.empty()) {
    s.problems = filter_by_ids(s.problems, load_id_file(f.ids));
    if (s.problems.empty()) throw InputError("no problems match --ids");
  }
  s.benchmark_id = fmt::format("{}:{}", to_string(benchmark_of(bf)),
                               fs::path(f.problem.benchmark).filename().string());

  const auto eff = resolve(f.backend);
  s.client = make_client(eff);

  s.base.strategy = strategy_from_string(f.strategy);
  s.base.name = f.strategy;
  s.base.order_policy = order_policy_from_string(f.sek.order);
  s.base.keyrank_enabled = !f.sek.no_keyrank;
  s.base.guidelines_enabled = parse_guidelines(f.sek.guidelines);
  s.base.max_keywords = f.sek.max_keywords;
  s.base.corpus_index_path = f.sek.index;
  s.base.completion = completion_params(eff);
  s.base.timeout_s = f.timeout;
  s.base.jobs = f.jobs;
  if (f.timeout <= 0) throw ConfigError("--timeout must be positive");

  s.index = index_for(f.sek, need_index);
  s.demos = demonstrations_for(f.sek, f.problem.benchmark, f.problem.format);
  s.templates = templates_for(f.sek);

  std::string runner = f.runner;
  if (runner.empty()) runner = env("SEK_RUNNER").value_or("sek-sandbox-runner");
  s.sandbox.emplace(split_command(runner));
  if (!s.sandbox->available()) {
    spdlog::warn("sandbox runner '{}' not found; candidates will be recorded as error",
                 runner);
  }
  spdlog::info("config: runner={} timeout={}s jobs={}", runner, f.timeout,
               f.jobs != 0 ? f.jobs : eff.concurrency);
  spdlog::info("config: strategy={} order={} keyrank={} guidelines={} max_keywords={}",
               f.strategy, f.sek.order, !f.sek.no_keyrank, f.sek.guidelines,
               f.sek.max_keywords);
  return s;
}

Evaluator make_evaluator(RunSetup& s) {
  EvaluatorResources r;
  r.client = s.client.get();
  r.index = s.index ? &*s.index : nullptr;
  r.demonstrations = s.demos;
  r.templates = s.templates;
  r.sandbox = s.sandbox ? &*s.sandbox : nullptr;
  return Evaluator(std::move(r));
}

std::unique_ptr<std::ofstream> open_records(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*f) throw InputError(fmt::format("{}: cannot open for append", path));
  return f;
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
  const auto text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"sek - self-explained keyword prompting for code generation", "sek"};
  app.require_subcommand(1);

  // index
  std::string corpus, text_field = "output", lang_field, lang = "python", index_out;
  std::size_t max_n = kDefaultMaxN;
  auto* index_cmd = app.add_subcommand("index", "Build a corpus n-gram index");
  index_cmd->add_option("--corpus", corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--text-field", text_field, "Record field holding the document")
      ->capture_default_str();
  index_cmd->add_option("--lang-field", lang_field, "Record field holding a language tag");
  index_cmd->add_option("--lang", lang, "Language tag to keep")->capture_default_str();
  index_cmd->add_option("--max-n", max_n, "Longest n-gram indexed")->capture_default_str();
  index_cmd->add_option("--out", index_out, "Index output path")->required();

  // extract
  ProblemFlags ex_problem;
  BackendFlags ex_backend;
  SekFlags ex_sek;
  bool ex_show_prompt = false;
  auto* extract_cmd = app.add_subcommand("extract", "Extract and explain keywords for one problem");
  add_problem_flags(extract_cmd, ex_problem);
  add_backend_flags(extract_cmd, ex_backend);
  add_sek_flags(extract_cmd, ex_sek);
  extract_cmd->add_flag("--show-prompt", ex_show_prompt, "Print the extraction prompt first");

  // rank
  ProblemFlags rk_problem;
  SekFlags rk_sek;
  std::string rk_keywords;
  bool rk_json = false;
  auto* rank_cmd = app.add_subcommand("rank", "Rank a keyword file against a problem");
  add_problem_flags(rank_cmd, rk_problem);
  rank_cmd->add_option("--keywords", rk_keywords, "[keyword]: explanation file")
      ->required()->check(CLI::ExistingFile);
  rank_cmd->add_option("--index", rk_sek.index, "Corpus index")->check(CLI::ExistingFile);
  rank_cmd->add_option("--order", rk_sek.order, "Block order policy")->capture_default_str();
  rank_cmd->add_flag("--no-keyrank", rk_sek.no_keyrank, "Keep extraction order");
  rank_cmd->add_option("--max-keywords", rk_sek.max_keywords, "Keyword cap")->capture_default_str();
  rank_cmd->add_flag("--json", rk_json, "Emit JSON");

  // enrich
  ProblemFlags en_problem;
  BackendFlags en_backend;
  SekFlags en_sek;
  std::string en_keywords;
  auto* enrich_cmd = app.add_subcommand("enrich", "Print the enriched prompt for one problem");
  add_problem_flags(enrich_cmd, en_problem);
  add_backend_flags(enrich_cmd, en_backend);
  add_sek_flags(enrich_cmd, en_sek);
  enrich_cmd->add_option("--keywords", en_keywords,
                         "Use this keyword file instead of querying the backend")
      ->check(CLI::ExistingFile);

  // run / ablate
  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Evaluate a benchmark and report Pass@1");
  add_run_flags(run_cmd, run_flags);

  RunFlags ab_flags;
  auto* ablate_cmd = app.add_subcommand("ablate", "Evaluate several pipeline variants");
  add_run_flags(ablate_cmd, ab_flags);
  ablate_cmd->add_option("--sweep", ab_flags.sweep, "orders, guidelines, keyrank or all");
  ablate_cmd->add_option("--variants", ab_flags.variants, "JSON array of variant overrides")
      ->check(CLI::ExistingFile);

  // report
  std::string rp_in, rp_format = "table";
  auto* report_cmd = app.add_subcommand("report", "Re-render a saved report");
  report_cmd->add_option("--in", rp_in, "Report JSON")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", rp_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (index_cmd->parsed()) {
      return cmd_index(corpus, text_field, lang_field, lang, max_n, index_out, out);
    }

    if (extract_cmd->parsed()) {
      const auto problem = load_one_problem(ex_problem);
      std::string prompt;
      try {
        const auto kws = extract_keywords(problem, ex_sek, ex_backend, ex_problem, &prompt);
        if (ex_show_prompt) out << prompt << "\n---\n";
        out << render_keywords(kws) << "\n";
      } catch (const ParseFailure& e) {
        if (ex_show_prompt) out << prompt << "\n---\n";
        err << "error: " << e.what() << "\n";
        return kExitEvalErrors;
      }
      return kExitOk;
    }

    if (rank_cmd->parsed()) {
      auto problem = load_one_problem(rk_problem);
      const auto kws = parse_keyword_response(read_text(rk_keywords), rk_sek.max_keywords);
      const auto index = index_for(rk_sek, !rk_sek.no_keyrank);
      const auto ranked =
          rk_sek.no_keyrank
              ? passthrough_keywords(kws, problem, index ? &*index : nullptr)
              : rank_keywords(kws, problem, *index, order_policy_from_string(rk_sek.order));
      if (rk_json) {
        out << to_json(ranked).dump(2) << "\n";
      } else {
        out << format_ranked(ranked);
      }
      return kExitOk;
    }

    if (enrich_cmd->parsed()) {
      const auto problem = load_one_problem(en_problem);
      std::vector<Keyword> kws;
      if (!en_keywords.empty()) {
        kws = parse_keyword_response(read_text(en_keywords), en_sek.max_keywords);
      } else {
        kws = extract_keywords(problem, en_sek, en_backend, en_problem, nullptr);
      }
      const auto index = index_for(en_sek, !en_sek.no_keyrank);
      const auto ranked =
          en_sek.no_keyrank
              ? passthrough_keywords(kws, problem, index ? &*index : nullptr)
              : rank_keywords(kws, problem, *index, order_policy_from_string(en_sek.order));
      out << enrich_problem(problem, ranked).text;
      return kExitOk;
    }

    if (run_cmd->parsed()) {
      const bool need_index = run_flags.strategy == "sek" && !run_flags.sek.no_keyrank;
      auto setup = prepare_run(run_flags, need_index);
      auto evaluator = make_evaluator(setup);
      auto records = open_records(run_flags.records);
      std::mutex records_mu;
      Evaluator::RecordSink sink;
      if (records) {
        sink = [&](const GenerationRecord& r) {
          std::lock_guard lock(records_mu);
          *records << to_json(r).dump() << '\n';
          records->flush();
        };
      }
      auto report = evaluator.run_benchmark(setup.problems, setup.base, setup.benchmark_id, sink);
      if (!run_flags.timing) report.timing.reset();
      err << render_table(report);
      emit_json(to_json(report), run_flags.out, out);
      return report.has_errors() ? kExitEvalErrors : kExitOk;
    }

    if (ablate_cmd->parsed()) {
      if (ab_flags.sweep.empty() == ab_flags.variants.empty()) {
        throw ConfigError("ablate needs exactly one of --sweep or --variants");
      }
      auto setup = prepare_run(ab_flags, false);
      const auto variants =
          ab_flags.sweep.empty()
              ? variants_from_json(json::parse(read_text(ab_flags.variants)), setup.base)
              : make_sweep(ab_flags.sweep, setup.base);
      const bool any_keyrank = std::any_of(variants.begin(), variants.end(), [](const auto& v) {
        return v.strategy == Strategy::kSek && v.keyrank_enabled;
      });
      if (any_keyrank && !setup.index) {
        throw ConfigError("--index is required: a variant uses KeyRank");
      }
      auto evaluator = make_evaluator(setup);
      auto records = open_records(ab_flags.records);
      std::mutex records_mu;
      Evaluator::RecordSink sink;
      if (records) {
        sink = [&](const GenerationRecord& r) {
          std::lock_guard lock(records_mu);
          *records << to_json(r).dump() << '\n';
        };
      }
      auto report = evaluator.run_ablation(setup.problems, variants, setup.benchmark_id, sink);
      bool errors = false;
      for (auto& v : report.variants) {
        if (v.report && !ab_flags.timing) v.report->timing.reset();
        errors = errors || v.error || (v.report && v.report->has_errors());
      }
      err << render_table(report);
      emit_json(to_json(report), ab_flags.out, out);
      return errors ? kExitEvalErrors : kExitOk;
    }

    if (report_cmd->parsed()) {
      json j;
      try {
        j = json::parse(read_text(rp_in));
      } catch (const json::parse_error& e) {
        throw InputError(fmt::format("{}: invalid JSON: {}", rp_in, e.what()));
      }
      if (j.contains("variants")) {
        const auto r = ablation_from_json(j);
        out << (rp_format == "json" ? to_json(r).dump(2) + "\n" : render_table(r));
      } else {
        const auto r = report_from_json(j);
        out << (rp_format == "json" ? to_json(r).dump(2) + "\n" : render_table(r));
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvalErrors;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace sek::cli
