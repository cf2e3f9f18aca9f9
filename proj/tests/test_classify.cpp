#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "ldade/classify.hpp"
#include "ldade/error.hpp"
#include "ldade/rng.hpp"
#include "ldade/stability.hpp"
#include "ldade/synthetic.hpp"

using namespace ldade;

namespace {

std::vector<std::string> labels_of(std::initializer_list<std::pair<const char*, int>> counts) {
  std::vector<std::string> out;
  for (const auto& [label, n] : counts)
    for (int i = 0; i < n; ++i) out.emplace_back(label);
  return out;
}

PipelineConfig planted_pipeline(int k) {
  PipelineConfig cfg;
  cfg.preprocess.keep_fraction = 1.0;
  cfg.lda.k = k;
  cfg.lda.alpha = 0.1;
  cfg.lda.beta = 0.1;
  cfg.lda.iterations = 50;
  return cfg;
}

std::vector<RawDocument> planted_docs(std::uint64_t seed, double off_topic = 0.2) {
  PlantedConfig pc;
  pc.off_topic_share = off_topic;
  pc.background_words = 20;
  pc.background_share = 0.2;
  pc.seed = seed;
  return make_planted_corpus(pc).documents;
}

}  // namespace

TEST_CASE("fbeta examples") {
  for (double beta : {0.5, 1.0, 2.0, 3.0})
    CHECK(fbeta(0.7, 0.7, beta) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fbeta(1.0, 0.0, 1.0) == 0.0);
  CHECK(fbeta(0.0, 0.0, 2.0) == 0.0);
  CHECK(std::abs(fbeta(0.6, 0.9, 2.0) - 2.7 / 3.3) < 1e-9);
  CHECK(std::abs(fbeta(0.5, 1.0, 1.0) - 2.0 / 3.0) < 1e-12);
  CHECK_THROWS_AS(fbeta(0.5, 0.5, 0.0), Error);
  CHECK_THROWS_AS(fbeta(0.5, 0.5, -1.0), Error);
  CHECK_THROWS_AS(fbeta(1.5, 0.5, 1.0), Error);
}

TEST_CASE("fbeta properties") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(gen), beta = 0.1 + 3.0 * u(gen);
    CHECK(fbeta(p, p, beta) == doctest::Approx(p).epsilon(1e-12));
    const double r1 = u(gen), r2 = u(gen);
    if (p > 0.0 && r1 != r2) CHECK((fbeta(p, r1, beta) < fbeta(p, r2, beta)) == (r1 < r2));
    const double f = fbeta(p, r1, beta);
    CHECK(f >= std::min(p, r1) - 1e-12);
    CHECK(f <= std::max(p, r1) + 1e-12);
    // F2 leans toward recall.
    if (r1 > p) CHECK(fbeta(p, r1, 2.0) >= fbeta(p, r1, 1.0));
  }
}

TEST_CASE("fold plans stratify and partition") {
  const auto labels = labels_of({{"no", 50}, {"yes", 50}});
  const auto plan = make_folds(labels, 5, 1);
  std::vector<std::size_t> seen;
  for (int f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    int yes = 0;
    for (auto i : test) yes += labels[i] == "yes";
    CHECK(test.size() == 20);
    CHECK(yes == 10);
    seen.insert(seen.end(), test.begin(), test.end());

    const auto train = plan.train_indices(f);
    const auto held = plan.validation_indices(f);
    CHECK(train.size() + held.size() + test.size() == labels.size());
    // Each class keeps 40 documents outside the test fold; 0.15 / 0.8 of 40 rounds to 8.
    CHECK(held.size() == 16);
    for (auto i : held) CHECK(plan.fold_of[i] != f);
    for (auto i : train) CHECK(!std::binary_search(held.begin(), held.end(), i));
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);

  const auto again = make_folds(labels, 5, 1);
  CHECK(again.fold_of == plan.fold_of);
  CHECK(again.validation == plan.validation);
  CHECK(make_folds(labels, 5, 2).fold_of != plan.fold_of);
}

TEST_CASE("fold plans on uneven classes") {
  const auto single = labels_of({{"a", 10}});
  const auto plan = make_folds(single, 5, 4);
  for (int f = 0; f < 5; ++f) CHECK(plan.test_indices(f).size() == 2);

  std::mt19937 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int folds = 2 + trial % 5;
    std::map<std::string, int> sizes = {{"a", folds + static_cast<int>(gen() % 40)},
                                        {"b", folds + static_cast<int>(gen() % 40)},
                                        {"c", folds + static_cast<int>(gen() % 40)}};
    std::vector<std::string> labels;
    for (const auto& [l, n] : sizes) labels.insert(labels.end(), n, l);
    std::shuffle(labels.begin(), labels.end(), gen);
    const auto p = make_folds(labels, folds, trial);
    for (const auto& [l, n] : sizes) {
      const double expected = static_cast<double>(n) / folds;
      for (int f = 0; f < folds; ++f) {
        int count = 0;
        for (auto i : p.test_indices(f)) count += labels[i] == l;
        CHECK(std::abs(count - expected) <= 1.0);
      }
    }
    std::size_t total = 0;
    for (int f = 0; f < folds; ++f) total += p.test_indices(f).size();
    CHECK(total == labels.size());
  }
}

TEST_CASE("fold plans reject small classes") {
  CHECK_THROWS_AS(make_folds(labels_of({{"a", 20}, {"b", 4}}), 5, 1), Error);
  CHECK_THROWS_AS(make_folds(labels_of({{"a", 20}}), 1, 1), Error);
}

TEST_CASE("linear SVM separates two clusters") {
  DenseMatrix x(40, 2);
  std::vector<int> y;
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (std::size_t i = 0; i < 40; ++i) {
    const bool pos = i % 2 == 0;
    x(i, 0) = (pos ? 1.0 : -1.0) + jitter(gen);
    x(i, 1) = (pos ? 1.0 : -1.0) + jitter(gen);
    y.push_back(pos ? 1 : -1);
  }
  const auto model = train_linear(x, y, {1e-3, 200, 7});
  for (std::size_t i = 0; i < 40; ++i) CHECK(model.predict(x.row(i)) == y[i]);

  const auto again = train_linear(x, y, {1e-3, 200, 7});
  CHECK(again.weights == model.weights);
  CHECK(again.bias == model.bias);
}

TEST_CASE("linear SVM without signal predicts the majority") {
  DenseMatrix x(10, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    x(i, 0) = 0.5;
    x(i, 1) = 0.5;
  }
  const std::vector<int> y = {1, 1, 1, 1, 1, 1, 1, -1, -1, -1};
  const auto model = train_linear(x, y, {1e-3, 200, 3});
  CHECK(model.predict(x.row(0)) == 1);

  const std::vector<int> flipped = {-1, -1, -1, -1, -1, -1, -1, 1, 1, 1};
  CHECK(train_linear(x, flipped, {1e-3, 200, 3}).predict(x.row(0)) == -1);
}

TEST_CASE("linear SVM input checks") {
  DenseMatrix x(3, 1);
  CHECK_THROWS_AS(train_linear(x, std::vector<int>{1, 1, 1}, {}), Error);
  CHECK_THROWS_AS(train_linear(x, std::vector<int>{1, 0, -1}, {}), Error);
  CHECK_THROWS_AS(train_linear(x, std::vector<int>{1, -1}, {}), Error);
  CHECK_THROWS_AS(train_classifier(x, std::vector<std::string>{"a", "a", "a"}, {}), Error);
}

TEST_CASE("one-vs-rest classifier on three clusters") {
  DenseMatrix x(60, 3);
  std::vector<std::string> y;
  for (std::size_t i = 0; i < 60; ++i) {
    const auto c = i % 3;
    for (std::size_t d = 0; d < 3; ++d) x(i, d) = d == c ? 0.8 : 0.1;
    y.push_back(std::string(1, static_cast<char>('a' + c)));
  }
  const auto clf = train_classifier(x, y, {1e-3, 100, 2});
  CHECK(clf.classes == std::vector<std::string>{"a", "b", "c"});
  CHECK(clf.models.size() == 3);
  for (std::size_t i = 0; i < 60; ++i) CHECK(clf.predict(x.row(i)) == y[i]);
}

TEST_CASE("prediction scoring") {
  const std::vector<std::string> truth = {"y", "y", "y", "n", "n", "n"};
  const std::vector<std::string> guess = {"y", "y", "n", "y", "n", "n"};
  const auto m = score_predictions(truth, guess, "y");
  CHECK(m.true_positive == 2);
  CHECK(m.false_negative == 1);
  CHECK(m.false_positive == 1);
  CHECK(m.true_negative == 2);
  CHECK(m.precision == doctest::Approx(2.0 / 3));
  CHECK(m.recall == doctest::Approx(2.0 / 3));
  CHECK(m.f1 == doctest::Approx(2.0 / 3));

  const auto none = score_predictions(truth, std::vector<std::string>(6, "n"), "y");
  CHECK(none.precision == 0.0);
  CHECK(none.f2 == 0.0);
}

TEST_CASE("pipeline on a planted corpus") {
  const auto docs = planted_docs(5);
  PipelineTrace trace;
  const auto metrics = evaluate_pipeline(docs, planted_pipeline(2), 11, &trace);
  CHECK(metrics.positive_label == "topic1");
  CHECK(metrics.f1 >= 0.9);
  CHECK(metrics.per_fold.size() == 5);
  CHECK(metrics.f1 == doctest::Approx(fbeta(metrics.precision, metrics.recall, 1.0)));
  CHECK(metrics.f2 == doctest::Approx(fbeta(metrics.precision, metrics.recall, 2.0)));
  if (metrics.recall >= metrics.precision) CHECK(metrics.f2 >= metrics.f1);
  std::vector<double> p;
  for (const auto& f : metrics.per_fold) p.push_back(f.precision);
  CHECK(metrics.precision == median(p));
  REQUIRE(trace.fold_models.size() == 5);
  for (const auto& m : trace.fold_models) CHECK_NOTHROW(check_model_invariants(m));
}

TEST_CASE("pipeline fits each fold on training documents only") {
  auto docs = planted_docs(6);
  const auto cfg = planted_pipeline(2);
  const std::uint64_t seed = 4;
  PipelineTrace trace;
  evaluate_pipeline(docs, cfg, seed, &trace);

  std::vector<std::string> labels;
  for (const auto& d : docs) labels.push_back(*d.label);
  const auto plan = make_folds(labels, cfg.folds, derive_seed(seed, {0}));
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<RawDocument> train;
    for (auto i : plan.train_indices(f)) train.push_back(docs[i]);
    const auto alone =
        fit_fold_lda(train, cfg, derive_seed(seed, {1, static_cast<std::uint64_t>(f)}));
    CHECK(alone.phi.data == trace.fold_models[f].phi.data);
    CHECK(alone.vocabulary->terms == trace.fold_models[f].vocabulary->terms);
  }

  // Rewriting fold 0's test documents must not move fold 0's model.
  for (auto i : plan.test_indices(0)) docs[i].text = "zzunseen qqforeign " + docs[i].text;
  PipelineTrace altered;
  evaluate_pipeline(docs, cfg, seed, &altered);
  CHECK(altered.fold_models[0].phi.data == trace.fold_models[0].phi.data);
}

TEST_CASE("pipeline determinism and seed sensitivity") {
  const auto docs = planted_docs(7, 0.45);
  auto cfg = planted_pipeline(10);
  cfg.lda.iterations = 20;
  const auto a = metrics_json(evaluate_pipeline(docs, cfg, 1));
  CHECK(metrics_json(evaluate_pipeline(docs, cfg, 1)) == a);
  cfg.jobs = 3;
  CHECK(metrics_json(evaluate_pipeline(docs, cfg, 1)) == a);

  cfg.jobs = 1;
  std::set<std::string> distinct;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto m = evaluate_pipeline(docs, cfg, s);
    std::string fold_f1;
    for (const auto& f : m.per_fold) fold_f1 += std::to_string(f.f1) + ",";
    distinct.insert(fold_f1);
  }
  CHECK(distinct.size() > 1);
}

TEST_CASE("pipeline requires labels") {
  auto docs = planted_docs(8);
  docs[3].label.reset();
  CHECK_THROWS_AS(evaluate_pipeline(docs, planted_pipeline(2), 1), Error);
}

TEST_CASE("metrics json keys") {
  const auto json = metrics_json(evaluate_pipeline(planted_docs(9), planted_pipeline(2), 2));
  for (const char* key : {"positive_label", "precision", "recall", "f1", "f2", "per_fold", "tp",
                          "validation_f1"})
    CHECK(json.find(std::string("\"") + key + "\"") != std::string::npos);
}
