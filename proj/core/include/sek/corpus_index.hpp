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

#ifndef SEK_CORPUS_INDEX_HPP
#define SEK_CORPUS_INDEX_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sek {

/// Lowercases and splits on whitespace and ASCII punctuation. Underscores
/// stay inside tokens, so `count_nums` is a single token. Bytes >= 0x80 are
/// kept as token characters so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// Contiguous, overlapping n-grams joined by single spaces.
/// Returns max(0, tokens.size() - n + 1) entries. Requires n >= 1.
std::vector<std::string> ngrams(std::span<const std::string> tokens,
                                std::size_t n);

/// tokenize() followed by a single-space join; the key space of the index.
std::string normalize_phrase(std::string_view text);

inline constexpr std::size_t kDefaultMaxN = 5;

/// Document-frequency table over all 1..max_n grams of a corpus.
/// Immutable once built; safe for concurrent readers.
class CorpusIndex {
 public:
  using DfMap = std::unordered_map<std::string, std::uint64_t>;

  CorpusIndex() = default;
  /// Validates 1 <= df <= total_docs and gram lengths in [1, max_n].
  CorpusIndex(std::uint64_t total_docs, std::size_t max_n, DfMap df);

  std::uint64_t total_docs() const { return total_docs_; }
  std::size_t max_n() const { return max_n_; }
  std::size_t size() const { return df_.size(); }
  const DfMap& entries() const { return df_; }

  /// df of the normalized phrase; 0 when absent or longer than max_n.
  std::uint64_t document_frequency(std::string_view phrase) const;

  /// JSON object {"total_docs", "max_n", "df": {gram: count}}, keys sorted.
  std::string to_json() const;
  static CorpusIndex from_json(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static CorpusIndex load(const std::filesystem::path& path);

  friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;

 private:
  std::uint64_t total_docs_ = 0;
  std::size_t max_n_ = kDefaultMaxN;
  DfMap df_;
};

CorpusIndex build_index(std::span<const std::string> documents,
                        std::size_t max_n = kDefaultMaxN);

/// Free-function form of CorpusIndex::document_frequency.
inline std::uint64_t document_frequency(const CorpusIndex& index,
                                        std::string_view phrase) {
  return index.document_frequency(phrase);
}

/// How documents are pulled out of a JSONL instruction corpus.
struct CorpusReadOptions {
  std::string text_field = "output";
  /// When set, only records whose `lang_field` equals `lang_value`
  /// (case-insensitive) are kept.
  std::optional<std::string> lang_field;
  std::string lang_value = "python";
};

std::vector<std::string> read_corpus_jsonl(const std::filesystem::path& path,
                                           const CorpusReadOptions& options);

}  // namespace sek

#endif  // SEK_CORPUS_INDEX_HPP
