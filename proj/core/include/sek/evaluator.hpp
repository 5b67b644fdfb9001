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

// Per-problem pipeline (extract -> rank -> enrich -> generate -> judge),
// batch evaluation with Pass@1 and ablation sweeps.

#ifndef SEK_EVALUATOR_HPP
#define SEK_EVALUATOR_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sek/benchmark_io.hpp"
#include "sek/corpus_index.hpp"
#include "sek/keyrank.hpp"
#include "sek/llm_client.hpp"
#include "sek/prompt_pipeline.hpp"
#include "sek/sandbox.hpp"

namespace sek {

enum class Strategy { kDefault, kSek };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

inline constexpr double kDefaultTimeoutSeconds = 10.0;

struct PipelineConfig {
  std::string name = "sek";
  Strategy strategy = Strategy::kSek;
  OrderPolicy order_policy = OrderPolicy::kAbsGenFunc;
  bool keyrank_enabled = true;
  std::array<bool, kGuidelineCount> guidelines_enabled = {true, true, true,
                                                          true, true};
  std::size_t max_keywords = kDefaultMaxKeywords;
  std::string corpus_index_path;  // recorded in the report only
  CompletionParams completion;
  /// Candidate wall-clock limit passed to the sandbox runner.
  double timeout_s = kDefaultTimeoutSeconds;
  /// Worker count; 0 means the client's in-flight bound.
  std::size_t jobs = 0;
};

/// Snapshot written into reports. Excludes `jobs`, which never affects
/// results.
nlohmann::json config_snapshot(const PipelineConfig& config);

struct GenerationRecord {
  std::string task_id;
  Strategy strategy = Strategy::kSek;
  std::optional<std::string> extraction_prompt;
  std::optional<std::string> extraction_response;
  int extraction_attempts = 0;
  bool fell_back_to_default = false;
  std::optional<std::vector<Keyword>> parsed_keywords;
  std::optional<RankedKeywords> ranked_keywords;
  /// The generation prompt actually sent to the model.
  std::string enriched_prompt;
  std::string generation_response;
  std::string extracted_code;
  Verdict verdict = Verdict::kError;
  std::optional<std::string> failure_detail;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const GenerationRecord& record);
nlohmann::json to_json(const RankedKeywords& ranked);

struct PassRate {
  std::size_t passed = 0;
  std::size_t total = 0;

  double value() const {
    return total == 0 ? 0.0
                      : static_cast<double>(passed) / static_cast<double>(total);
  }
  friend bool operator==(const PassRate&, const PassRate&) = default;
};

/// passed / total over the verdicts. Throws ConfigError on an empty list.
PassRate pass_at_1(std::span<const Verdict> verdicts);

struct ProblemResult {
  std::string task_id;
  Verdict verdict = Verdict::kError;
  std::optional<std::string> detail;
  bool fell_back_to_default = false;
};

struct TimingStats {
  double wall_seconds = 0.0;
  double mean_problem_seconds = 0.0;
  double max_problem_seconds = 0.0;
};

struct EvalReport {
  std::string benchmark;
  nlohmann::json config;
  std::vector<ProblemResult> results;  // benchmark order
  PassRate pass_at_1;
  /// Wall-clock figures differ between runs; they are only serialized when
  /// requested so that reports stay byte-comparable.
  std::optional<TimingStats> timing;

  bool has_errors() const;
};

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
/// Aligned text table followed by a Pass@1 summary line.
std::string render_table(const EvalReport& report);

struct AblationEntry {
  std::string name;
  std::optional<EvalReport> report;
  std::optional<std::string> error;
};

struct AblationReport {
  std::vector<AblationEntry> variants;
};

nlohmann::json to_json(const AblationReport& report);
AblationReport ablation_from_json(const nlohmann::json& j);
std::string render_table(const AblationReport& report);

/// Shared, read-only resources for a run.
struct EvaluatorResources {
  ChatClient* client = nullptr;
  /// Required when a config uses strategy sek with KeyRank enabled.
  const CorpusIndex* index = nullptr;
  std::vector<Demonstration> demonstrations;
  PromptTemplates templates = default_templates();
  /// Null means no runner is configured; verdicts become error.
  const SandboxClient* sandbox = nullptr;
};

class Evaluator {
 public:
  explicit Evaluator(EvaluatorResources resources);

  /// Generation only; verdict stays error until evaluate_solution runs.
  /// Backend failures are recorded in the record, never thrown.
  GenerationRecord run_pipeline(const ProblemSpec& problem,
                                const PipelineConfig& config) const;

  /// Judges record.extracted_code in the sandbox.
  Verdict evaluate_solution(GenerationRecord& record, const ProblemSpec& problem,
                            const PipelineConfig& config) const;

  /// Called with every record in benchmark order as soon as it and all its
  /// predecessors are complete.
  using RecordSink = std::function<void(const GenerationRecord&)>;

  EvalReport run_benchmark(std::span<const ProblemSpec> problems,
                           const PipelineConfig& config,
                           std::string_view benchmark_id,
                           const RecordSink& sink = {}) const;

  /// One report per variant. A variant that cannot run is reported with its
  /// error; the others still run.
  AblationReport run_ablation(std::span<const ProblemSpec> problems,
                              std::span<const PipelineConfig> variants,
                              std::string_view benchmark_id,
                              const RecordSink& sink = {}) const;

 private:
  void check_config(const PipelineConfig& config) const;

  EvaluatorResources res_;
};

/// Named variants for ablation sweeps built from `base`:
///   "orders"     one variant per order policy
///   "guidelines" all guidelines plus one variant per removed guideline
///   "keyrank"    KeyRank on and off
///   "all"        the default strategy, the order and guideline variants and
///                KeyRank off
std::vector<PipelineConfig> make_sweep(std::string_view sweep,
                                       const PipelineConfig& base);

/// Reads `[{"name", "strategy"?, "order"?, "keyrank"?, "guidelines"?,
/// "max_keywords"?}]`; omitted fields come from `base`.
std::vector<PipelineConfig> variants_from_json(const nlohmann::json& j,
                                               const PipelineConfig& base);

}  // namespace sek

#endif  // SEK_EVALUATOR_HPP
