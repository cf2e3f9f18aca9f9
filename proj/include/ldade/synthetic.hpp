#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"

namespace ldade {

/// Corpus with known topics. Each planted topic owns a disjoint set of
/// pseudo-words with Zipf weights 1/(rank+1); each document has one dominant
/// topic (assigned round-robin) and may borrow tokens from another planted
/// topic or from a shared background vocabulary.
struct PlantedConfig {
  std::size_t num_docs = 200;
  std::size_t num_topics = 2;
  std::size_t words_per_topic = 10;
  std::size_t doc_length = 40;
  std::size_t background_words = 0;
  double background_share = 0.0;
  double off_topic_share = 0.0;
  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  /// text = space separated words, label = "topic<N>" of the dominant topic.
  std::vector<RawDocument> documents;
  /// Every generated word is in the vocabulary (no tf-idf pruning).
  DocumentTermMatrix matrix;
  /// Per planted topic, words ordered by generating weight (heaviest first).
  std::vector<std::vector<std::string>> planted_topics;
  std::vector<std::string> background;
  std::vector<int> dominant_topic;
};

PlantedCorpus make_planted_corpus(const PlantedConfig& config);

/// Deterministic pronounceable pseudo-word, fixed under Porter stemming and
/// distinct for distinct i.
std::string planted_word(std::size_t i);

}  // namespace ldade
