#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ldade/error.hpp"
#include "ldade/stats.hpp"

using namespace ldade;

using V = std::vector<double>;

TEST_CASE("a12 examples") {
  CHECK(a12(V{3.0}, V{3.0}) == 0.5);
  CHECK(a12(V{5, 6, 7}, V{1, 2, 4}) == 1.0);
  CHECK(a12(V{1, 2, 4}, V{5, 6, 7}) == 0.0);
  CHECK(std::abs(a12(V{1, 2}, V{1, 3}) - 0.375) < 1e-9);
  CHECK_THROWS_AS(a12(V{}, V{1}), Error);
  CHECK_THROWS_AS(a12(V{1}, V{}), Error);
}

TEST_CASE("a12 properties") {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> small(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    V xs(1 + trial % 7), ys(1 + trial % 5);
    for (auto& x : xs) x = small(gen);
    for (auto& y : ys) y = small(gen);
    const double a = a12(xs, ys);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(a + a12(ys, xs) == doctest::Approx(1.0).epsilon(1e-12));

    V tx = xs, ty = ys;
    for (auto& x : tx) x = std::exp(x) - 3.0;
    for (auto& y : ty) y = std::exp(y) - 3.0;
    CHECK(a12(tx, ty) == a);
  }
}

TEST_CASE("bootstrap examples") {
  const V same = {0.3, 0.5, 0.7, 0.4};
  CHECK(bootstrap_test(same, same, 1000, 1) >= 0.3);
  CHECK(bootstrap_test(V{0, 0, 0, 0}, V{10, 10, 10, 10}, 1000, 1) <= 0.01);
  CHECK(bootstrap_test(same, V{0.9, 1.1, 1.0, 1.2}, 1000, 7) ==
        bootstrap_test(same, V{0.9, 1.1, 1.0, 1.2}, 1000, 7));
  CHECK_THROWS_AS(bootstrap_test(same, same, 0, 1), Error);
  CHECK_THROWS_AS(bootstrap_test(V{}, same, 10, 1), Error);
}

TEST_CASE("bootstrap p falls as groups separate") {
  std::mt19937 gen(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  V base(20), near(20), far(20);
  for (std::size_t i = 0; i < 20; ++i) {
    const double e = noise(gen);
    base[i] = noise(gen);
    near[i] = 0.2 + e;
    far[i] = 3.0 + e;
  }
  const double p_near = bootstrap_test(base, near, 2000, 3);
  const double p_far = bootstrap_test(base, far, 2000, 3);
  CHECK(p_far < 0.01);
  CHECK(p_near > p_far);
  CHECK(p_near >= 0.0);
  CHECK(p_near <= 1.0);
}

TEST_CASE("scott-knott examples") {
  const StatsConfig cfg;
  const auto one = scott_knott(std::vector<SampleGroup>{{"only", {1, 2, 3}}}, cfg, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rank == 1);
  CHECK(one[0].median == 2.0);

  const std::vector<SampleGroup> apart = {{"low", V(10, 0.0)}, {"high", V(10, 10.0)}};
  const auto two = scott_knott(apart, cfg, 1);
  REQUIRE(two.size() == 2);
  CHECK(two[0].name == "high");
  CHECK(two[0].rank == 1);
  CHECK(two[1].name == "low");
  CHECK(two[1].rank == 2);

  const std::vector<SampleGroup> twins = {{"a", {0.4, 0.5, 0.6, 0.5}}, {"b", {0.4, 0.5, 0.6, 0.5}}};
  for (const auto& g : scott_knott(twins, cfg, 1)) CHECK(g.rank == 1);
}

TEST_CASE("scott-knott needs a non-small effect as well as significance") {
  // Large samples make a tiny shift significant, but A12 stays near 0.5.
  V a, b;
  for (int i = 0; i < 400; ++i) {
    a.push_back(i % 100 + 0.5);
    b.push_back(i % 100);
  }
  const std::vector<SampleGroup> groups = {{"a", a}, {"b", b}};
  StatsConfig cfg;
  cfg.significance = 0.9;
  for (const auto& g : scott_knott(groups, cfg, 2)) CHECK(g.rank == 1);
  cfg.a12_threshold = 0.5;
  const auto split = scott_knott(groups, cfg, 2);
  CHECK(split[0].rank == 1);
  CHECK(split[1].rank == 2);
}

TEST_CASE("scott-knott ranks three tiers") {
  std::vector<SampleGroup> groups;
  for (int tier = 0; tier < 3; ++tier)
    for (int member = 0; member < 2; ++member) {
      V v;
      for (int i = 0; i < 10; ++i) v.push_back(tier * 10.0 + (i % 3) * 0.1 + member * 0.01);
      groups.push_back({"t" + std::to_string(tier) + "m" + std::to_string(member), v});
    }
  const auto ranked = scott_knott(groups, StatsConfig{}, 3);
  for (const auto& g : ranked) CHECK(g.rank == 3 - (g.name[1] - '0'));
}

TEST_CASE("scott-knott is order invariant with contiguous ranks") {
  std::mt19937 gen(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SampleGroup> groups;
    const int count = 2 + trial % 6;
    for (int g = 0; g < count; ++g) {
      V v;
      const double shift = (gen() % 4) * 2.0;
      for (int i = 0; i < 12; ++i) v.push_back(shift + noise(gen));
      groups.push_back({"g" + std::to_string(g), v});
    }
    const auto ref = scott_knott(groups, StatsConfig{}, 5);
    REQUIRE(ref.size() == groups.size());
    CHECK(ref.front().rank == 1);
    for (std::size_t i = 1; i < ref.size(); ++i) {
      CHECK(ref[i].rank >= ref[i - 1].rank);
      CHECK(ref[i].rank <= ref[i - 1].rank + 1);
      CHECK(ref[i].median <= ref[i - 1].median);
    }
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      std::shuffle(groups.begin(), groups.end(), gen);
      const auto again = scott_knott(groups, StatsConfig{}, 5);
      REQUIRE(again.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(again[i].name == ref[i].name);
        CHECK(again[i].rank == ref[i].rank);
      }
    }
  }
}

TEST_CASE("scott-knott input checks") {
  CHECK_THROWS_AS(scott_knott(std::vector<SampleGroup>{}, StatsConfig{}, 1), Error);
  CHECK_THROWS_AS(scott_knott(std::vector<SampleGroup>{{"e", {}}}, StatsConfig{}, 1), Error);
  StatsConfig bad;
  bad.significance = 1.5;
  CHECK_THROWS_AS(scott_knott(std::vector<SampleGroup>{{"a", {1}}}, bad, 1), Error);
  bad = {};
  bad.a12_threshold = 0.4;
  CHECK_THROWS_AS(scott_knott(std::vector<SampleGroup>{{"a", {1}}}, bad, 1), Error);
}

TEST_CASE("group csv parsing and ranked output") {
  const auto groups = parse_groups_csv("group,value\ntuned,0.9\nuntuned,0.5\ntuned,0.8\n");
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].name == "tuned");
  CHECK(groups[0].values == V{0.9, 0.8});
  CHECK(groups[1].values == V{0.5});

  const auto headerless = parse_groups_csv("a,1\nb,2\n");
  CHECK(headerless.size() == 2);
  CHECK_THROWS_AS(parse_groups_csv("a,1\nb,oops\n"), Error);
  CHECK_THROWS_AS(parse_groups_csv("a,1,2\n"), Error);
  CHECK_THROWS_AS(parse_groups_csv("group,value\n"), Error);

  const auto csv = ranked_groups_csv(scott_knott(groups, StatsConfig{}, 1));
  CHECK(csv.rfind("rank,group,n,median,mean\n", 0) == 0);
  CHECK(csv.find("1,tuned,2,0.85,0.85\n") != std::string::npos);
}
