#include "ldade/synthetic.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ldade/error.hpp"
#include "ldade/porter_stemmer.hpp"
#include "ldade/rng.hpp"

namespace ldade {
namespace {

const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = [] {
    constexpr std::string_view consonants = "bdfgkmnprtvz";
    constexpr std::string_view vowels = "aiou";
    const auto stop = default_stopwords();
    std::vector<std::string> words;
    std::set<std::string> seen;
    // Scramble the enumeration order so word rank and spelling are unrelated.
    for (std::uint64_t i = 0; words.size() < 4096; ++i) {
      std::uint64_t h = mix64(i);
      std::string w;
      for (int s = 0; s < 2; ++s) {
        w.push_back(consonants[h % consonants.size()]);
        h /= consonants.size();
        w.push_back(vowels[h % vowels.size()]);
        h /= vowels.size();
      }
      w.push_back(consonants[h % consonants.size()]);
      if (porter_stem(w) != w || stop.contains(w) || !seen.insert(w).second) continue;
      words.push_back(w);
    }
    return words;
  }();
  return pool;
}

std::size_t draw_weighted(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

}  // namespace

std::string planted_word(std::size_t i) {
  const auto& pool = word_pool();
  if (i >= pool.size()) throw Error("planted word index too large");
  return pool[i];
}

PlantedCorpus make_planted_corpus(const PlantedConfig& config) {
  if (config.num_topics < 1 || config.words_per_topic < 1 || config.num_docs < 1 ||
      config.doc_length < 1)
    throw Error("planted corpus needs at least one topic, word, document and token");
  if (config.background_share < 0 || config.off_topic_share < 0 ||
      config.background_share + config.off_topic_share > 1.0)
    throw Error("planted corpus shares must be nonnegative and sum to at most 1");
  if (config.off_topic_share > 0 && config.num_topics < 2)
    throw Error("off-topic tokens need at least two planted topics");
  if (config.background_share > 0 && config.background_words == 0)
    throw Error("background share needs background words");

  PlantedCorpus out;
  std::size_t next = 0;
  out.planted_topics.resize(config.num_topics);
  for (auto& topic : out.planted_topics)
    for (std::size_t r = 0; r < config.words_per_topic; ++r) topic.push_back(planted_word(next++));
  for (std::size_t r = 0; r < config.background_words; ++r)
    out.background.push_back(planted_word(next++));

  std::vector<double> zipf(config.words_per_topic);
  double acc = 0.0;
  for (std::size_t r = 0; r < zipf.size(); ++r) zipf[r] = acc += 1.0 / static_cast<double>(r + 1);

  Rng rng(config.seed);
  std::vector<std::vector<std::string>> tokens(config.num_docs);
  const auto width = std::to_string(config.num_docs).size();
  for (std::size_t d = 0; d < config.num_docs; ++d) {
    const auto topic = d % config.num_topics;
    out.dominant_topic.push_back(static_cast<int>(topic));
    std::string text;
    for (std::size_t i = 0; i < config.doc_length; ++i) {
      const double u = rng.uniform();
      std::string word;
      if (u < config.background_share) {
        word = out.background[rng.below(out.background.size())];
      } else if (u < config.background_share + config.off_topic_share) {
        auto other = static_cast<std::size_t>(rng.below(config.num_topics - 1));
        if (other >= topic) ++other;
        word = out.planted_topics[other][draw_weighted(zipf, rng)];
      } else {
        word = out.planted_topics[topic][draw_weighted(zipf, rng)];
      }
      if (!text.empty()) text.push_back(' ');
      text += word;
      tokens[d].push_back(std::move(word));
    }
    std::string id = std::to_string(d);
    id.insert(0, width - id.size(), '0');
    out.documents.push_back({"doc" + id, std::move(text), "topic" + std::to_string(topic)});
  }

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> stats;
  std::int64_t total = 0;
  for (const auto& doc : tokens) {
    std::set<std::string> seen;
    for (const auto& t : doc) {
      auto& s = stats[t];
      ++s.first;
      if (seen.insert(t).second) ++s.second;
      ++total;
    }
  }
  auto vocab = std::make_shared<Vocabulary>();
  vocab->total_tokens = total;
  vocab->total_documents = static_cast<std::int64_t>(config.num_docs);
  vocab->distinct_terms = static_cast<std::int64_t>(stats.size());
  for (const auto& [term, s] : stats) {
    vocab->term_index.emplace(term, static_cast<int>(vocab->terms.size()));
    vocab->terms.push_back(term);
    vocab->corpus_tf.push_back(s.first);
    vocab->doc_freq.push_back(s.second);
    vocab->tfidf_score.push_back(tfidf_score(s.first, total, s.second, vocab->total_documents));
  }
  out.matrix = build_matrix(out.documents, tokens, std::move(vocab)).matrix;
  return out;
}

}  // namespace ldade
