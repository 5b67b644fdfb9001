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

#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sek/error.hpp"
#include "test_util.hpp"

using namespace sek;
using Strings = std::vector<std::string>;

TEST_CASE("tokenize") {
  CHECK(tokenize("Sum of digits") == Strings{"sum", "of", "digits"});
  CHECK(tokenize("count_nums(arr)") == Strings{"count_nums", "arr"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \n\t ").empty());
  CHECK(tokenize("a-b,C.d") == Strings{"a", "b", "c", "d"});
  CHECK(tokenize("caf\xc3\xa9 ok") == Strings{"caf\xc3\xa9", "ok"});
}

TEST_CASE("tokenize agrees with the character-scan oracle") {
  std::mt19937 rng(11);
  const std::string alphabet = "aZ_9 .,-()\n\t\xc3\xa9!";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const auto len = rng() % 30;
    for (std::size_t j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    CHECK(tokenize(s) == oracle::words(s));
  }
}

TEST_CASE("ngrams") {
  const Strings abc = {"a", "b", "c"};
  CHECK(ngrams(abc, 2) == Strings{"a b", "b c"});
  CHECK(ngrams(Strings{"a"}, 2).empty());
  CHECK(ngrams(Strings{"sum", "of", "digits"}, 3) == Strings{"sum of digits"});
  CHECK(ngrams(abc, 1) == abc);
  CHECK_THROWS(ngrams(abc, 0));
}

TEST_CASE("build_index examples") {
  const auto empty = build_index(Strings{});
  CHECK(empty.total_docs() == 0);
  CHECK(empty.size() == 0);

  const Strings docs = {"sum of digits", "sum of squares"};
  const auto idx = build_index(docs, 2);
  CHECK(idx.total_docs() == 2);
  CHECK(idx.document_frequency("sum") == oracle::doc_freq(docs, "sum", 2));
  CHECK(idx.document_frequency("sum") == 2);
  CHECK(idx.document_frequency("digits") == 1);
  CHECK(idx.document_frequency("sum of") == 2);
  CHECK(idx.document_frequency("of digits") == 1);
  CHECK(idx.document_frequency("SUM OF") == 2);
  CHECK(idx.document_frequency("never seen") == 0);
  CHECK(idx.document_frequency("sum of digits") == 0);  // longer than max_n

  const Strings toy = {"count the even digits of n", "sum digits evenly",
                       "even numbers and odd digits"};
  const auto t = build_index(toy);
  CHECK(oracle::doc_freq(toy, "even digits", kDefaultMaxN) == 1);
  CHECK(t.document_frequency("even digits") == 1);
}

TEST_CASE("df matches the brute-force oracle on random corpora") {
  std::mt19937 rng(5);
  const Strings vocab = {"sum", "of", "digits", "even", "odd", "list", "the", "a"};
  for (int iter = 0; iter < 200; ++iter) {
    Strings docs;
    const auto ndocs = 1 + rng() % 10;
    for (std::size_t d = 0; d < ndocs; ++d) {
      std::string doc;
      const auto len = rng() % 12;
      for (std::size_t w = 0; w < len; ++w) {
        doc += vocab[rng() % vocab.size()];
        doc += (rng() % 4 == 0) ? ", " : " ";
      }
      docs.push_back(doc);
    }
    const std::size_t max_n = 1 + rng() % 4;
    const auto idx = build_index(docs, max_n);
    for (int q = 0; q < 20; ++q) {
      std::string phrase;
      const auto plen = 1 + rng() % 5;
      for (std::size_t w = 0; w < plen; ++w) {
        if (w) phrase += ' ';
        phrase += vocab[rng() % vocab.size()];
      }
      CHECK(idx.document_frequency(phrase) == oracle::doc_freq(docs, phrase, max_n));
    }
    // Every stored entry must agree as well.
    for (const auto& [gram, df] : idx.entries()) {
      CHECK(df == oracle::doc_freq(docs, gram, max_n));
    }
  }
}

TEST_CASE("serialization round trip") {
  const Strings docs = {"sum of digits", "Sum of squares", "even digits"};
  const auto idx = build_index(docs, 3);
  CHECK(CorpusIndex::from_json(idx.to_json()) == idx);
  CHECK(CorpusIndex::from_json(idx.to_json()).to_json() == idx.to_json());

  testutil::TempDir dir;
  idx.save(dir / "index.json");
  CHECK(CorpusIndex::load(dir / "index.json") == idx);
  CHECK_THROWS(CorpusIndex::load(dir / "missing.json"));
  CHECK_THROWS(CorpusIndex::from_json("{\"total_docs\": 1}"));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS(CorpusIndex(1, 2, {{"a", 2}}));          // df > total
  CHECK_THROWS(CorpusIndex(1, 1, {{"a b", 1}}));        // gram too long
  CHECK_THROWS(CorpusIndex(1, 0, {}));                  // max_n = 0
  CHECK_NOTHROW(CorpusIndex(2, 2, {{"a b", 2}, {"a", 1}}));
}

TEST_CASE("read_corpus_jsonl filters by language") {
  const auto all = read_corpus_jsonl(testutil::fixture("corpus.jsonl"), {});
  CHECK(all.size() == 8);
  CorpusReadOptions opts;
  opts.lang_field = "lang";
  const auto py = read_corpus_jsonl(testutil::fixture("corpus.jsonl"), opts);
  CHECK(py.size() == 7);
  opts.text_field = "missing";
  CHECK_THROWS_AS(read_corpus_jsonl(testutil::fixture("corpus.jsonl"), opts),
                  InputError);
}
