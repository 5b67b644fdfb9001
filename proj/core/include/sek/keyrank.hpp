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

// KeyRank: keyword classification, TF-IDF scoring of general keywords and
// the final block ordering.
//
// Each extracted keyword falls in one of three categories:
//   function  the keyword names the target function (score -1)
//   general   its token sequence occurs in the problem description
//             (score = TF-IDF against the corpus index)
//   abstract  neither; a summary term the model coined (no score)
//
// General and function keywords are pooled and sorted by descending score
// with ties kept in extraction order. The ranked list is then assembled
// block by block, abstract -> general -> function under the default policy.

#ifndef SEK_KEYRANK_HPP
#define SEK_KEYRANK_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sek/benchmark_io.hpp"
#include "sek/corpus_index.hpp"

namespace sek {

struct Keyword {
  std::string text;
  std::string explanation;

  friend bool operator==(const Keyword&, const Keyword&) = default;
};

enum class Category { kFunction, kGeneral, kAbstract };

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

inline constexpr double kFunctionKeywordScore = -1.0;

struct ClassifiedKeyword {
  Keyword keyword;
  Category category = Category::kAbstract;
  /// -1 for function keywords, TF-IDF for general, empty for abstract.
  std::optional<double> score;

  friend bool operator==(const ClassifiedKeyword&,
                         const ClassifiedKeyword&) = default;
};

/// Block order of the ranked output, named by the category sequence.
enum class OrderPolicy { kAbsGenFunc, kFuncAbsGen, kGenFuncAbs, kGenAbsFunc };

inline constexpr std::array<OrderPolicy, 4> kAllOrderPolicies = {
    OrderPolicy::kAbsGenFunc, OrderPolicy::kFuncAbsGen,
    OrderPolicy::kGenFuncAbs, OrderPolicy::kGenAbsFunc};

std::string_view to_string(OrderPolicy p);
OrderPolicy order_policy_from_string(std::string_view s);
std::array<Category, 3> block_order(OrderPolicy p);

struct RankedKeywords {
  std::vector<ClassifiedKeyword> ordered;
  OrderPolicy order_policy = OrderPolicy::kAbsGenFunc;

  bool empty() const { return ordered.empty(); }
  std::size_t size() const { return ordered.size(); }
};

/// Function iff the normalized keyword equals the normalized function name;
/// general iff its token sequence occurs contiguously in the description's
/// tokens; abstract otherwise (including keywords with no tokens at all).
Category classify_keyword(const Keyword& keyword, const ProblemSpec& problem,
                          const std::optional<std::string>& function_name);

/// Occurrences of the keyword's m-gram among the description's m-grams,
/// divided by the number of m-grams. Throws ScoringError when the keyword
/// has no tokens or the description is shorter than m tokens.
double tf(const Keyword& keyword, const ProblemSpec& problem);

/// tf * ln(|D| / (1 + df)). Negative values are returned as is.
/// Throws ScoringError("empty corpus") when the index holds no documents.
double tfidf(const Keyword& keyword, const ProblemSpec& problem,
             const CorpusIndex& index);

/// Drops case-insensitive duplicate keyword texts, keeping the first.
std::vector<Keyword> dedupe_keywords(std::span<const Keyword> keywords);

RankedKeywords rank_keywords(std::span<const Keyword> keywords,
                             const ProblemSpec& problem,
                             const CorpusIndex& index,
                             OrderPolicy policy = OrderPolicy::kAbsGenFunc);

/// Ranking with KeyRank disabled: deduplicated keywords in extraction order.
/// Categories are still filled in for provenance. General keywords are
/// scored only when a non-empty index is supplied; otherwise their score is
/// left empty.
RankedKeywords passthrough_keywords(std::span<const Keyword> keywords,
                                    const ProblemSpec& problem,
                                    const CorpusIndex* index = nullptr);

}  // namespace sek

#endif  // SEK_KEYRANK_HPP
