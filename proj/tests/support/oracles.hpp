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

// Brute-force reference implementations used as test oracles. They share
// no code with the library: tokens are found with a character scan, phrase
// presence with padded string search, and ranking with a selection sort.

#ifndef SEK_TESTS_ORACLES_HPP
#define SEK_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

inline bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32)
                                    : static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) {
    if (!s.empty()) s += ' ';
    s += x;
  }
  return s;
}

// Overlapping occurrences of `phrase` in `text`, both as word lists, found by
// searching the space-padded joined strings.
inline std::size_t occurrences(const std::vector<std::string>& text,
                               const std::vector<std::string>& phrase) {
  if (phrase.empty()) return 0;
  const std::string hay = " " + join(text) + " ";
  const std::string needle = " " + join(phrase) + " ";
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

inline std::size_t doc_freq(const std::vector<std::string>& docs,
                            const std::string& phrase, std::size_t max_n) {
  const auto p = words(phrase);
  if (p.empty() || p.size() > max_n) return 0;
  std::size_t df = 0;
  for (const auto& d : docs) {
    if (occurrences(words(d), p) > 0) ++df;
  }
  return df;
}

inline double tfidf(const std::string& keyword, const std::string& description,
                    const std::vector<std::string>& docs, std::size_t max_n) {
  const auto k = words(keyword);
  const auto d = words(description);
  const double n_i = static_cast<double>(occurrences(d, k));
  const double grams = static_cast<double>(d.size() - k.size() + 1);
  const double df = static_cast<double>(doc_freq(docs, keyword, max_n));
  return (n_i / grams) *
         std::log(static_cast<double>(docs.size()) / (1.0 + df));
}

enum class Cat { kAbs, kGen, kFunc };

struct Ranked {
  std::string text;
  Cat cat;
  std::optional<double> score;
};

inline std::string fold(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

// `blocks` lists the category order, e.g. {kAbs, kGen, kFunc}.
inline std::vector<Ranked> rank(const std::vector<std::string>& keywords,
                                const std::string& description,
                                const std::optional<std::string>& function_name,
                                const std::vector<std::string>& docs,
                                std::size_t max_n, const Cat (&blocks)[3]) {
  std::vector<std::string> uniq;
  for (const auto& k : keywords) {
    bool dup = false;
    for (const auto& u : uniq) dup = dup || fold(u) == fold(k);
    if (!dup) uniq.push_back(k);
  }
  const auto desc = words(description);
  std::vector<Ranked> abs;
  std::vector<Ranked> pool;
  for (const auto& k : uniq) {
    const auto kw = words(k);
    if (kw.empty()) {
      abs.push_back({k, Cat::kAbs, std::nullopt});
    } else if (function_name && join(kw) == join(words(*function_name))) {
      pool.push_back({k, Cat::kFunc, -1.0});
    } else if (occurrences(desc, kw) > 0) {
      pool.push_back({k, Cat::kGen, tfidf(k, description, docs, max_n)});
    } else {
      abs.push_back({k, Cat::kAbs, std::nullopt});
    }
  }
  // Selection sort: repeatedly take the earliest maximum.
  std::vector<Ranked> sorted;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (*pool[i].score > *pool[best].score) best = i;
    }
    sorted.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  std::vector<Ranked> out;
  for (const Cat c : blocks) {
    const auto& src = c == Cat::kAbs ? abs : sorted;
    for (const auto& r : src) {
      if (r.cat == c) out.push_back(r);
    }
  }
  return out;
}

}  // namespace oracle

#endif  // SEK_TESTS_ORACLES_HPP
