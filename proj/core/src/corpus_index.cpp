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

#include "sek/corpus_index.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sek/error.hpp"

namespace sek {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

char ascii_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

std::size_t count_tokens(std::string_view gram) {
  if (gram.empty()) return 0;
  return static_cast<std::size_t>(std::count(gram.begin(), gram.end(), ' ')) + 1;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      cur.push_back(ascii_lower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens,
                                std::size_t n) {
  if (n == 0) throw ConfigError("ngrams: n must be >= 1");
  std::vector<std::string> out;
  if (tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      g += ' ';
      g += tokens[i + j];
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::string normalize_phrase(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

CorpusIndex::CorpusIndex(std::uint64_t total_docs, std::size_t max_n, DfMap df)
    : total_docs_(total_docs), max_n_(max_n), df_(std::move(df)) {
  if (max_n_ == 0) throw InputError("corpus index: max_n must be >= 1");
  for (const auto& [gram, count] : df_) {
    if (count == 0 || count > total_docs_) {
      throw InputError(fmt::format(
          "corpus index: df['{}'] = {} outside [1, {}]", gram, count,
          total_docs_));
    }
    const auto n = count_tokens(gram);
    if (n == 0 || n > max_n_) {
      throw InputError(fmt::format(
          "corpus index: gram '{}' has {} tokens, max_n is {}", gram, n, max_n_));
    }
  }
}

std::uint64_t CorpusIndex::document_frequency(std::string_view phrase) const {
  const auto key = normalize_phrase(phrase);
  if (key.empty() || count_tokens(key) > max_n_) return 0;
  const auto it = df_.find(key);
  return it == df_.end() ? 0 : it->second;
}

std::string CorpusIndex::to_json() const {
  // std::map gives a stable key order, so equal indexes serialize identically.
  const std::map<std::string, std::uint64_t> sorted(df_.begin(), df_.end());
  json j = {{"total_docs", total_docs_}, {"max_n", max_n_}, {"df", sorted}};
  return j.dump();
}

CorpusIndex CorpusIndex::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("corpus index: invalid JSON: {}", e.what()));
  }
  for (const char* field : {"total_docs", "max_n", "df"}) {
    if (!j.contains(field)) {
      throw InputError(fmt::format("corpus index: missing field '{}'", field));
    }
  }
  DfMap df;
  df.reserve(j["df"].size());
  for (const auto& [gram, count] : j["df"].items()) {
    df.emplace(gram, count.get<std::uint64_t>());
  }
  return CorpusIndex(j["total_docs"].get<std::uint64_t>(),
                     j["max_n"].get<std::size_t>(), std::move(df));
}

void CorpusIndex::save(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("{}: cannot write file", path.string()));
  out << to_json() << '\n';
}

CorpusIndex CorpusIndex::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

CorpusIndex build_index(std::span<const std::string> documents,
                        std::size_t max_n) {
  if (max_n == 0) throw ConfigError("build_index: max_n must be >= 1");
  CorpusIndex::DfMap df;
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    const auto tokens = tokenize(doc);
    seen.clear();
    for (std::size_t n = 1; n <= max_n && n <= tokens.size(); ++n) {
      for (auto& g : ngrams(tokens, n)) seen.insert(std::move(g));
    }
    for (const auto& g : seen) ++df[g];
  }
  return CorpusIndex(documents.size(), max_n, std::move(df));
}

std::vector<std::string> read_corpus_jsonl(const fs::path& path,
                                           const CorpusReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  auto lower = [](std::string s) {
    for (auto& c : s) c = ascii_lower(static_cast<unsigned char>(c));
    return s;
  };
  const auto want_lang = lower(options.lang_value);

  std::vector<std::string> docs;
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
    if (options.lang_field) {
      const auto it = rec.find(*options.lang_field);
      if (it == rec.end() || !it->is_string() ||
          lower(it->get<std::string>()) != want_lang) {
        continue;
      }
    }
    const auto it = rec.find(options.text_field);
    if (it == rec.end() || !it->is_string()) {
      throw InputError(fmt::format("{}:{}: missing field '{}'", path.string(),
                                   lineno, options.text_field));
    }
    docs.push_back(it->get<std::string>());
  }
  return docs;
}

}  // namespace sek
