#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ldade/porter_stemmer.hpp"

using ldade::porter_stem;

TEST_CASE("porter: documented examples") {
  CHECK(porter_stem("connection") == "connect");
  CHECK(porter_stem("connections") == "connect");
  CHECK(porter_stem("connected") == "connect");
  CHECK(porter_stem("run") == "run");
  CHECK(porter_stem("caresses") == "caress");
}

TEST_CASE("porter: short words are left alone") {
  CHECK(porter_stem("") == "");
  CHECK(porter_stem("a") == "a");
  CHECK(porter_stem("is") == "is");
}

TEST_CASE("porter: matches reference vectors") {
  std::ifstream in(std::string(LDADE_TEST_DATA_DIR) + "/porter_vectors.txt");
  REQUIRE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string word, stem;
    fields >> word >> stem;
    INFO(word);
    CHECK(porter_stem(word) == stem);
    ++checked;
  }
  CHECK(checked > 1000);
}
