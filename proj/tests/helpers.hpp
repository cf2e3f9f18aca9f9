#pragma once

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"
#include "ldade/io.hpp"
#include "ldade/synthetic.hpp"

namespace ldade::test {

inline std::vector<RawDocument> docs_from(const std::vector<std::string>& texts) {
  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < texts.size(); ++i)
    docs.push_back({"d" + std::to_string(100 + i), texts[i], std::nullopt});
  return docs;
}

inline std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

inline std::vector<RawDocument> bundled_corpus() {
  return io::load_corpus(std::filesystem::path(LDADE_DATA_DIR) / "se_issues.csv",
                         io::CorpusFormat::Csv);
}

inline DocumentTermMatrix bundled_matrix() {
  PreprocessConfig config;
  config.stopwords = default_stopwords();
  return build_corpus(bundled_corpus(), config).matrix;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ldade_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ldade::test
