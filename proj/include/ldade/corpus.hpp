#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ldade {

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> label;
};

struct PreprocessConfig {
  std::set<std::string, std::less<>> stopwords;
  bool stemming_enabled = true;
  /// Fraction of distinct terms kept by tf-idf selection.
  double keep_fraction = 0.05;
  int min_token_length = 2;

  void validate() const;
};

/// Retained terms plus the corpus statistics used to select them.
/// Terms are sorted lexicographically; index i of every per-term vector
/// refers to terms[i].
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int> term_index;
  std::vector<std::int64_t> corpus_tf;  // w: occurrences across the corpus
  std::vector<std::int64_t> doc_freq;   // d: documents containing the term
  std::vector<double> tfidf_score;
  std::int64_t total_tokens = 0;        // W
  std::int64_t total_documents = 0;     // D
  std::int64_t distinct_terms = 0;      // before selection

  std::size_t size() const { return terms.size(); }
  /// -1 when the term was not retained.
  int index_of(std::string_view term) const;
};

struct TermCount {
  int term;
  int count;
  friend bool operator==(const TermCount&, const TermCount&) = default;
  friend auto operator<=>(const TermCount&, const TermCount&) = default;
};

/// One sparse row per document, entries sorted by term index.
using SparseRow = std::vector<TermCount>;

/// Documents x retained vocabulary. Row order is the order LDA sees the data.
struct DocumentTermMatrix {
  std::vector<std::string> doc_ids;
  std::shared_ptr<const Vocabulary> vocabulary;
  std::vector<SparseRow> rows;
  /// Empty for unlabeled corpora, otherwise aligned with rows.
  std::vector<std::string> labels;

  std::size_t num_docs() const { return rows.size(); }
  std::size_t num_terms() const { return vocabulary ? vocabulary->size() : 0; }
  bool has_labels() const { return !labels.empty(); }
  std::int64_t total_tokens() const;
  std::int64_t row_tokens(std::size_t doc) const;

  /// Checks the structural invariants; throws Error on violation.
  void validate() const;
};

struct BuildResult {
  DocumentTermMatrix matrix;
  std::vector<std::string> dropped_ids;
};

/// Lowercases, splits on any non-alphanumeric byte, drops short and purely
/// numeric tokens.
std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config);

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const std::set<std::string, std::less<>>& stopwords);

/// Full token pipeline for one document: tokenize, drop stopwords, stem.
std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& config);

/// Scores every distinct term by (w/W) * ln(D/d) and keeps the top
/// ceil(keep_fraction * distinct) terms; ties go to the lexicographically
/// smaller term.
Vocabulary select_vocabulary(std::span<const std::vector<std::string>> docs,
                             const PreprocessConfig& config);

double tfidf_score(std::int64_t w, std::int64_t total_words, std::int64_t d,
                   std::int64_t total_docs);

/// Counts retained terms per document. Documents left without any retained
/// token are dropped and reported.
BuildResult build_matrix(std::span<const RawDocument> docs,
                         std::span<const std::vector<std::string>> tokens,
                         std::shared_ptr<const Vocabulary> vocab);

/// Convenience: preprocess, select the vocabulary, build the matrix.
BuildResult build_corpus(std::span<const RawDocument> docs, const PreprocessConfig& config);

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed);

/// Returns a copy with rows reordered so that row i of the result is row
/// order[i] of the input.
DocumentTermMatrix permute_rows(const DocumentTermMatrix& matrix,
                                std::span<const std::size_t> order);

/// Rows (with ids and labels) permuted by shuffle_permutation(num_docs, seed).
DocumentTermMatrix shuffle(const DocumentTermMatrix& matrix, std::uint64_t seed);

/// Rows sorted by document id.
DocumentTermMatrix canonical_order(const DocumentTermMatrix& matrix);

/// The bundled English stopword list.
std::set<std::string, std::less<>> default_stopwords();

/// Parses a stopword file body: one token per line, '#' starts a comment.
std::set<std::string, std::less<>> parse_stopwords(std::string_view body);

}  // namespace ldade
