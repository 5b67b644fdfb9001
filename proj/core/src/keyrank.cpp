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

#include "sek/keyrank.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "sek/error.hpp"

namespace sek {

namespace {

std::size_t count_occurrences(std::span<const std::string> haystack,
                              std::span<const std::string> needle) {
  if (needle.empty() || haystack.size() < needle.size()) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) ++count;
  }
  return count;
}

bool contains_sequence(std::span<const std::string> haystack,
                       std::span<const std::string> needle) {
  if (needle.empty()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

std::string dedupe_key(std::string_view text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(" \t\r\n");
  std::string key(text.substr(b, e - b + 1));
  for (auto& c : key) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return key;
}

ClassifiedKeyword classify_and_score(const Keyword& k,
                                     const ProblemSpec& problem,
                                     const std::optional<std::string>& fname,
                                     const CorpusIndex* index) {
  ClassifiedKeyword ck{k, classify_keyword(k, problem, fname), std::nullopt};
  if (ck.category == Category::kFunction) {
    ck.score = kFunctionKeywordScore;
  } else if (ck.category == Category::kGeneral && index != nullptr) {
    ck.score = tfidf(k, problem, *index);
  }
  return ck;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kFunction: return "function";
    case Category::kGeneral: return "general";
    case Category::kAbstract: return "abstract";
  }
  return "";
}

Category category_from_string(std::string_view s) {
  if (s == "function") return Category::kFunction;
  if (s == "general") return Category::kGeneral;
  if (s == "abstract") return Category::kAbstract;
  throw ConfigError(fmt::format("unknown keyword category '{}'", s));
}

std::string_view to_string(OrderPolicy p) {
  switch (p) {
    case OrderPolicy::kAbsGenFunc: return "abs_gen_func";
    case OrderPolicy::kFuncAbsGen: return "func_abs_gen";
    case OrderPolicy::kGenFuncAbs: return "gen_func_abs";
    case OrderPolicy::kGenAbsFunc: return "gen_abs_func";
  }
  return "";
}

OrderPolicy order_policy_from_string(std::string_view s) {
  for (const auto p : kAllOrderPolicies) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError(fmt::format(
      "unknown order policy '{}' (expected abs_gen_func, func_abs_gen, "
      "gen_func_abs or gen_abs_func)",
      s));
}

std::array<Category, 3> block_order(OrderPolicy p) {
  using C = Category;
  switch (p) {
    case OrderPolicy::kAbsGenFunc: return {C::kAbstract, C::kGeneral, C::kFunction};
    case OrderPolicy::kFuncAbsGen: return {C::kFunction, C::kAbstract, C::kGeneral};
    case OrderPolicy::kGenFuncAbs: return {C::kGeneral, C::kFunction, C::kAbstract};
    case OrderPolicy::kGenAbsFunc: return {C::kGeneral, C::kAbstract, C::kFunction};
  }
  return {C::kAbstract, C::kGeneral, C::kFunction};
}

Category classify_keyword(const Keyword& keyword, const ProblemSpec& problem,
                          const std::optional<std::string>& function_name) {
  const auto kw = normalize_phrase(keyword.text);
  if (kw.empty()) return Category::kAbstract;
  if (function_name && kw == normalize_phrase(*function_name)) {
    return Category::kFunction;
  }
  const auto desc_tokens = tokenize(problem.description);
  const auto kw_tokens = tokenize(keyword.text);
  return contains_sequence(desc_tokens, kw_tokens) ? Category::kGeneral
                                                   : Category::kAbstract;
}

double tf(const Keyword& keyword, const ProblemSpec& problem) {
  const auto kw_tokens = tokenize(keyword.text);
  if (kw_tokens.empty()) {
    throw ScoringError(
        fmt::format("keyword '{}' has no tokens", keyword.text));
  }
  const auto desc_tokens = tokenize(problem.description);
  if (desc_tokens.size() < kw_tokens.size()) {
    throw ScoringError("gram length exceeds description");
  }
  const auto total = desc_tokens.size() - kw_tokens.size() + 1;
  const auto hits = count_occurrences(desc_tokens, kw_tokens);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double tfidf(const Keyword& keyword, const ProblemSpec& problem,
             const CorpusIndex& index) {
  if (index.total_docs() == 0) throw ScoringError("empty corpus");
  const double df = static_cast<double>(index.document_frequency(keyword.text));
  const double idf =
      std::log(static_cast<double>(index.total_docs()) / (1.0 + df));
  return tf(keyword, problem) * idf;
}

std::vector<Keyword> dedupe_keywords(std::span<const Keyword> keywords) {
  std::vector<Keyword> out;
  std::unordered_set<std::string> seen;
  for (const auto& k : keywords) {
    if (seen.insert(dedupe_key(k.text)).second) out.push_back(k);
  }
  return out;
}

RankedKeywords rank_keywords(std::span<const Keyword> keywords,
                             const ProblemSpec& problem,
                             const CorpusIndex& index, OrderPolicy policy) {
  const auto fname = resolve_function_name(problem);
  const auto unique = dedupe_keywords(keywords);

  std::vector<ClassifiedKeyword> abstract_block;
  std::vector<ClassifiedKeyword> pool;  // general + function, scored
  for (const auto& k : unique) {
    auto ck = classify_and_score(k, problem, fname, &index);
    if (ck.category == Category::kAbstract) {
      abstract_block.push_back(std::move(ck));
    } else {
      pool.push_back(std::move(ck));
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const ClassifiedKeyword& a, const ClassifiedKeyword& b) {
                     return *a.score > *b.score;
                   });

  RankedKeywords ranked;
  ranked.order_policy = policy;
  ranked.ordered.reserve(unique.size());
  for (const auto cat : block_order(policy)) {
    if (cat == Category::kAbstract) {
      ranked.ordered.insert(ranked.ordered.end(), abstract_block.begin(),
                            abstract_block.end());
      continue;
    }
    for (const auto& ck : pool) {
      if (ck.category == cat) ranked.ordered.push_back(ck);
    }
  }
  return ranked;
}

RankedKeywords passthrough_keywords(std::span<const Keyword> keywords,
                                    const ProblemSpec& problem,
                                    const CorpusIndex* index) {
  const auto fname = resolve_function_name(problem);
  if (index != nullptr && index->total_docs() == 0) index = nullptr;
  RankedKeywords ranked;
  for (const auto& k : dedupe_keywords(keywords)) {
    ranked.ordered.push_back(classify_and_score(k, problem, fname, index));
  }
  return ranked;
}

}  // namespace sek
