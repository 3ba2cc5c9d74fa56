#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hitr/sparse_distribution.hpp"

namespace hitr {

using WordId = ItemId;

// Dense word-id space: every id in [0, size()) maps to exactly one token
// and back.
struct Vocabulary {
  std::vector<std::string> words;                    // id -> token
  std::unordered_map<std::string, WordId> index;     // token -> id
  std::vector<std::uint64_t> doc_frequency;          // id -> #docs containing it
  std::vector<std::uint64_t> collection_frequency;   // id -> total occurrences

  std::size_t size() const { return words.size(); }
  // -1 when the token is unknown.
  long lookup(const std::string& token) const;
};

// Tokenized bag of words. `counts` is sorted by word id; all counts are
// positive; `length` is the token total.
struct Document {
  std::string id;
  std::vector<std::pair<WordId, std::uint32_t>> counts;
  std::uint64_t length = 0;
  std::string group;        // empty = none
  std::string class_label;  // empty = none

  std::uint64_t count_of(WordId w) const;
};

// Record of what preprocessing removed; kept for inspection, not serialized.
struct PreprocessLog {
  std::vector<std::string> removed_stopwords;
  std::vector<std::string> removed_top_frequency;
  std::vector<std::string> removed_rare;
  std::vector<std::string> removed_reestimation;  // words emptied out by DR
  std::vector<std::string> dropped_documents;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  PreprocessLog preprocess_log;

  std::uint64_t total_tokens() const;
};

struct RawDocument {
  std::string id;
  std::string text;
  std::string group;        // empty = none
  std::string class_label;  // empty = none
};

// Lowercased alphabetic tokens: the text is split on whitespace, then every
// non-alphabetic byte (punctuation, digits, non-ASCII) is stripped from each
// piece. Pieces that strip to nothing are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Tokenizes and filters the raw documents into an integer-coded corpus:
//  1. stopwords are removed;
//  2. the top_k_remove most collection-frequent remaining words are removed
//     (ties broken by first occurrence);
//  3. words with collection frequency < min_count are removed;
//  4. word ids are assigned to the survivors in first-occurrence order;
//  5. documents with no surviving tokens are dropped (and logged).
// Throws DataError if every document ends up empty.
Corpus build_corpus(const std::vector<RawDocument>& raw_docs,
                    const std::unordered_set<std::string>& stopwords,
                    std::size_t top_k_remove = 100,
                    std::uint64_t min_count = 5);

// Builds a corpus directly from per-document token counts (no filtering).
// Word ids follow first occurrence. Used for pre-tokenized inputs and for
// constructing fixtures.
struct CountedDocument {
  std::string id;
  std::vector<std::pair<std::string, std::uint32_t>> token_counts;
  std::string group;
  std::string class_label;
};
Corpus corpus_from_counts(const std::vector<CountedDocument>& docs);

// Maximum-likelihood collection language model:
//   P(w) = collection_frequency[w] / total tokens.
// Support is exactly the words with nonzero frequency; sums to 1 within 1e-9.
SparseDistribution collection_language_model(const Corpus& corpus);

// Re-expresses `source`'s documents in the id space of `target_tokens`
// (matching by token string). Words absent from the target vocabulary are
// dropped. Throws DataError if a document loses all of its tokens.
// Needed when scoring documents against a model whose vocabulary was
// rebuilt by document re-estimation.
Corpus translate_corpus(const Corpus& source,
                        const std::vector<std::string>& target_tokens);

// Input loaders (see the CLI): a directory of UTF-8 .txt files (filename
// stem = doc id, lexicographic order) or a JSON-lines file with fields
// {"id", "text", "group"?, "label"?}.
std::vector<RawDocument> load_raw_directory(const std::string& dir_path);
std::vector<RawDocument> load_raw_jsonl(const std::string& file_path);

// One token per line, UTF-8; blank lines ignored.
std::unordered_set<std::string> load_stopwords(const std::string& file_path);

}  // namespace hitr
