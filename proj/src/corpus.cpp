#include "ldade/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ldade/error.hpp"
#include "ldade/porter_stemmer.hpp"
#include "ldade/rng.hpp"

namespace ldade {

extern const char* const kBundledStopwords;  // generated from data/stopwords_en.txt

namespace {

bool is_numeric(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_alphabetic(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw Error("keep_fraction must lie in (0, 1]");
  if (min_token_length < 1) throw Error("min_token_length must be >= 1");
}

int Vocabulary::index_of(std::string_view term) const {
  auto it = term_index.find(std::string(term));
  return it == term_index.end() ? -1 : it->second;
}

std::int64_t DocumentTermMatrix::row_tokens(std::size_t doc) const {
  std::int64_t n = 0;
  for (const auto& tc : rows[doc]) n += tc.count;
  return n;
}

std::int64_t DocumentTermMatrix::total_tokens() const {
  std::int64_t n = 0;
  for (std::size_t d = 0; d < rows.size(); ++d) n += row_tokens(d);
  return n;
}

void DocumentTermMatrix::validate() const {
  if (!vocabulary) throw Error("matrix has no vocabulary");
  if (doc_ids.size() != rows.size()) throw Error("doc_ids and rows differ in length");
  if (!labels.empty() && labels.size() != rows.size())
    throw Error("labels and rows differ in length");
  const auto v = static_cast<int>(vocabulary->size());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].term < 0 || row[i].term >= v) throw Error("term index out of range");
      if (row[i].count <= 0) throw Error("nonpositive cell count");
      if (i > 0 && row[i - 1].term >= row[i].term) throw Error("row entries not sorted");
    }
  }
  if (total_tokens() <= 0) throw Error("matrix has no tokens");
}

std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (static_cast<int>(current.size()) >= config.min_token_length && !is_numeric(current))
      tokens.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const std::set<std::string, std::less<>>& stopwords) {
  std::erase_if(tokens, [&](const std::string& t) { return stopwords.contains(t); });
  return tokens;
}

std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& config) {
  auto tokens = remove_stopwords(tokenize(text, config), config.stopwords);
  if (config.stemming_enabled) {
    // Tokens mixing letters and digits (identifiers, versions) are kept verbatim.
    for (auto& t : tokens)
      if (is_alphabetic(t)) t = porter_stem(t);
  }
  return tokens;
}

double tfidf_score(std::int64_t w, std::int64_t total_words, std::int64_t d,
                   std::int64_t total_docs) {
  return (static_cast<double>(w) / static_cast<double>(total_words)) *
         std::log(static_cast<double>(total_docs) / static_cast<double>(d));
}

Vocabulary select_vocabulary(std::span<const std::vector<std::string>> docs,
                             const PreprocessConfig& config) {
  config.validate();
  struct Stat {
    std::int64_t tf = 0;
    std::int64_t df = 0;
  };
  std::map<std::string, Stat> stats;
  std::int64_t total = 0;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : doc) {
      auto& s = stats[t];
      ++s.tf;
      if (seen.insert(t).second) ++s.df;
      ++total;
    }
  }
  if (total == 0) throw Error("corpus contains no tokens after preprocessing");
  const auto num_docs = static_cast<std::int64_t>(docs.size());

  struct Scored {
    const std::string* term;
    Stat stat;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(stats.size());
  for (const auto& [term, s] : stats)
    scored.push_back({&term, s, tfidf_score(s.tf, total, s.df, num_docs)});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return *a.term < *b.term;
  });

  // Guard against 0.05 * 40 landing a hair above an integer.
  const double wanted = config.keep_fraction * static_cast<double>(scored.size());
  auto keep = static_cast<std::size_t>(std::ceil(wanted - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, scored.size());
  scored.resize(keep);
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return *a.term < *b.term; });

  Vocabulary vocab;
  vocab.total_tokens = total;
  vocab.total_documents = num_docs;
  vocab.distinct_terms = static_cast<std::int64_t>(stats.size());
  for (const auto& s : scored) {
    vocab.term_index.emplace(*s.term, static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(*s.term);
    vocab.corpus_tf.push_back(s.stat.tf);
    vocab.doc_freq.push_back(s.stat.df);
    vocab.tfidf_score.push_back(s.score);
  }
  return vocab;
}

BuildResult build_matrix(std::span<const RawDocument> docs,
                         std::span<const std::vector<std::string>> tokens,
                         std::shared_ptr<const Vocabulary> vocab) {
  if (docs.size() != tokens.size()) throw Error("documents and token lists differ in length");
  const bool labeled = std::any_of(docs.begin(), docs.end(),
                                   [](const RawDocument& d) { return d.label.has_value(); });
  BuildResult out;
  out.matrix.vocabulary = vocab;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!ids.insert(docs[i].id).second) throw Error("duplicate document id: " + docs[i].id);
    std::map<int, int> counts;
    for (const auto& t : tokens[i]) {
      const int idx = vocab->index_of(t);
      if (idx >= 0) ++counts[idx];
    }
    if (counts.empty()) {
      out.dropped_ids.push_back(docs[i].id);
      continue;
    }
    SparseRow row;
    row.reserve(counts.size());
    for (const auto& [term, count] : counts) row.push_back({term, count});
    out.matrix.rows.push_back(std::move(row));
    out.matrix.doc_ids.push_back(docs[i].id);
    if (labeled) {
      if (!docs[i].label) throw Error("document " + docs[i].id + " has no label");
      out.matrix.labels.push_back(*docs[i].label);
    }
  }
  if (out.matrix.rows.empty()) throw Error("every document was empty after preprocessing");
  return out;
}

BuildResult build_corpus(std::span<const RawDocument> docs, const PreprocessConfig& config) {
  config.validate();
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(docs.size());
  for (const auto& d : docs) tokens.push_back(preprocess(d.text, config));
  auto vocab = std::make_shared<const Vocabulary>(select_vocabulary(tokens, config));
  return build_matrix(docs, tokens, std::move(vocab));
}

std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

DocumentTermMatrix permute_rows(const DocumentTermMatrix& matrix,
                                std::span<const std::size_t> order) {
  if (order.size() != matrix.num_docs()) throw Error("permutation size mismatch");
  DocumentTermMatrix out;
  out.vocabulary = matrix.vocabulary;
  out.rows.reserve(order.size());
  out.doc_ids.reserve(order.size());
  for (auto i : order) {
    out.rows.push_back(matrix.rows.at(i));
    out.doc_ids.push_back(matrix.doc_ids[i]);
    if (matrix.has_labels()) out.labels.push_back(matrix.labels[i]);
  }
  return out;
}

DocumentTermMatrix shuffle(const DocumentTermMatrix& matrix, std::uint64_t seed) {
  const auto order = shuffle_permutation(matrix.num_docs(), seed);
  return permute_rows(matrix, order);
}

DocumentTermMatrix canonical_order(const DocumentTermMatrix& matrix) {
  std::vector<std::size_t> order(matrix.num_docs());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return matrix.doc_ids[a] < matrix.doc_ids[b];
  });
  return permute_rows(matrix, order);
}

std::set<std::string, std::less<>> parse_stopwords(std::string_view body) {
  std::set<std::string, std::less<>> words;
  std::istringstream in{std::string(body)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r\n");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(std::move(word));
  }
  return words;
}

std::set<std::string, std::less<>> default_stopwords() {
  return parse_stopwords(kBundledStopwords);
}

}  // namespace ldade
