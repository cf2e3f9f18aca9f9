#include "ldade/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "ldade/error.hpp"
#include "ldade/json_util.hpp"
#include "ldade/parallel.hpp"
#include "ldade/rng.hpp"
#include "ldade/stability.hpp"

namespace ldade {

double fbeta(double precision, double recall, double beta) {
  if (!(beta > 0.0)) throw Error("F-beta needs beta > 0");
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0)
    throw Error("precision and recall must lie in [0, 1]");
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  const auto& held = validation.at(static_cast<std::size_t>(fold));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold && !std::binary_search(held.begin(), held.end(), i)) out.push_back(i);
  return out;
}

FoldPlan make_folds(std::span<const std::string> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error("cross-validation needs at least two folds");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class)
    if (members.size() < static_cast<std::size_t>(folds))
      throw Error("class '" + label + "' has " + std::to_string(members.size()) +
                  " documents, fewer than the " + std::to_string(folds) + " folds");

  FoldPlan plan;
  plan.folds = folds;
  plan.fold_of.assign(labels.size(), -1);
  // Deal each class round-robin, continuing the offset across classes so
  // that fold sizes stay balanced too.
  std::size_t offset = 0;
  std::uint64_t class_index = 0;
  for (auto& [label, members] : by_class) {
    const auto order = shuffle_permutation(members.size(), derive_seed(seed, {0, class_index++}));
    for (std::size_t p = 0; p < order.size(); ++p)
      plan.fold_of[members[order[p]]] = static_cast<int>((offset + p) % static_cast<std::size_t>(folds));
    offset += members.size();
  }

  // Share of the non-test pool; this operation order gives exactly 0.1875 at five folds.
  const double held_fraction = kValidationShare * folds / (folds - 1);
  plan.validation.resize(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    class_index = 0;
    for (const auto& [label, members] : by_class) {
      std::vector<std::size_t> pool;
      for (auto i : members)
        if (plan.fold_of[i] != f) pool.push_back(i);
      const auto order = shuffle_permutation(
          pool.size(), derive_seed(seed, {1, static_cast<std::uint64_t>(f), class_index++}));
      const auto take = static_cast<std::size_t>(std::lround(held_fraction * static_cast<double>(pool.size())));
      for (std::size_t p = 0; p < take; ++p) plan.validation[f].push_back(pool[order[p]]);
    }
    std::sort(plan.validation[f].begin(), plan.validation[f].end());
  }
  return plan;
}

double LinearModel::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) throw Error("feature width does not match the model");
  double s = bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
  return s;
}

LinearModel train_linear(const DenseMatrix& features, std::span<const int> labels,
                         const SvmOptions& options) {
  if (features.rows != labels.size()) throw Error("features and labels differ in length");
  if (!(options.lambda > 0.0) || options.epochs < 1) throw Error("invalid SVM options");
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error("binary labels must be +1 or -1");
    (y == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error("training a classifier needs both classes");

  const std::size_t dim = features.cols;
  std::vector<double> w(dim + 1, 0.0);  // last entry multiplies the constant feature
  Rng rng(options.seed);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = shuffle_permutation(features.rows, rng.next());
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const auto x = features.row(i);
      double margin = w[dim];
      for (std::size_t c = 0; c < dim; ++c) margin += w[c] * x[c];
      margin *= labels[i];
      const double shrink = 1.0 - eta * options.lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        const double step = eta * labels[i];
        for (std::size_t c = 0; c < dim; ++c) w[c] += step * x[c];
        w[dim] += step;
      }
    }
  }
  LinearModel model;
  model.bias = w[dim];
  w.pop_back();
  model.weights = std::move(w);
  return model;
}

std::string Classifier::predict(std::span<const double> x) const {
  if (models.size() == 1) return models[0].decision(x) >= 0.0 ? classes[1] : classes[0];
  std::size_t best = 0;
  double best_score = models[0].decision(x);
  for (std::size_t c = 1; c < models.size(); ++c) {
    const double s = models[c].decision(x);
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return classes[best];
}

Classifier train_classifier(const DenseMatrix& features, std::span<const std::string> labels,
                            const SvmOptions& options) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw Error("training a classifier needs at least two classes");
  Classifier clf;
  clf.classes.assign(distinct.begin(), distinct.end());
  auto binary_for = [&](const std::string& positive) {
    std::vector<int> y;
    y.reserve(labels.size());
    for (const auto& l : labels) y.push_back(l == positive ? 1 : -1);
    return y;
  };
  if (clf.classes.size() == 2) {
    clf.models.push_back(train_linear(features, binary_for(clf.classes[1]), options));
  } else {
    for (std::size_t c = 0; c < clf.classes.size(); ++c) {
      SvmOptions o = options;
      o.seed = derive_seed(options.seed, {c});
      clf.models.push_back(train_linear(features, binary_for(clf.classes[c]), o));
    }
  }
  return clf;
}

FoldMetrics score_predictions(std::span<const std::string> truth,
                              std::span<const std::string> predicted,
                              const std::string& positive_label) {
  if (truth.size() != predicted.size()) throw Error("prediction count mismatch");
  FoldMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == positive_label;
    const bool guess = predicted[i] == positive_label;
    if (actual && guess) ++m.true_positive;
    else if (!actual && guess) ++m.false_positive;
    else if (actual && !guess) ++m.false_negative;
    else ++m.true_negative;
  }
  const int pp = m.true_positive + m.false_positive;
  const int ap = m.true_positive + m.false_negative;
  m.precision = pp == 0 ? 0.0 : static_cast<double>(m.true_positive) / pp;
  m.recall = ap == 0 ? 0.0 : static_cast<double>(m.true_positive) / ap;
  m.f1 = fbeta(m.precision, m.recall, 1.0);
  m.f2 = fbeta(m.precision, m.recall, 2.0);
  return m;
}

namespace {

std::vector<RawDocument> pick(std::span<const RawDocument> docs,
                              std::span<const std::size_t> idx) {
  std::vector<RawDocument> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(docs[i]);
  return out;
}

std::vector<SparseRow> rows_for(std::span<const RawDocument> docs, const PreprocessConfig& pre,
                                const Vocabulary& vocab) {
  std::vector<SparseRow> rows;
  for (const auto& d : docs) {
    std::map<int, int> counts;
    for (const auto& t : preprocess(d.text, pre))
      if (const int idx = vocab.index_of(t); idx >= 0) ++counts[idx];
    SparseRow row;
    for (const auto& [term, count] : counts) row.push_back({term, count});
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TopicModel fit_fold_lda(std::span<const RawDocument> train_docs, const PipelineConfig& config,
                        std::uint64_t seed) {
  auto built = build_corpus(train_docs, config.preprocess);
  LdaParams params = config.lda;
  params.seed = seed;
  return fit_gibbs(built.matrix, params);
}

Metrics evaluate_pipeline(std::span<const RawDocument> corpus, const PipelineConfig& config,
                          std::uint64_t seed, PipelineTrace* trace) {
  std::vector<std::string> labels;
  for (const auto& d : corpus) {
    if (!d.label) throw Error("document " + d.id + " has no label");
    labels.push_back(*d.label);
  }
  Metrics metrics;
  metrics.positive_label = config.positive_label.value_or(
      labels.empty() ? std::string() : *std::max_element(labels.begin(), labels.end()));

  const auto plan = make_folds(labels, config.folds, derive_seed(seed, {0}));
  std::vector<FoldMetrics> folds(static_cast<std::size_t>(config.folds));
  std::vector<TopicModel> models(static_cast<std::size_t>(config.folds));

  parallel_for(folds.size(), config.jobs, [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const auto train = pick(corpus, plan.train_indices(f));
    const auto test = pick(corpus, plan.test_indices(f));
    const auto held = pick(corpus, plan.validation_indices(f));

    TopicModel model = fit_fold_lda(train, config, derive_seed(seed, {1, fi}));
    std::vector<std::string> train_labels;
    for (const auto& id : model.doc_ids)
      for (const auto& d : train)
        if (d.id == id) {
          train_labels.push_back(*d.label);
          break;
        }
    SvmOptions svm = config.svm;
    svm.seed = derive_seed(seed, {2, fi});
    const auto clf = train_classifier(doc_topic_features(model), train_labels, svm);

    auto predict_all = [&](const std::vector<RawDocument>& docs, std::uint64_t fold_seed) {
      const auto theta = fold_in(model, rows_for(docs, config.preprocess, *model.vocabulary),
                                 config.fold_in_sweeps, fold_seed);
      std::vector<std::string> truth, guess;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        truth.push_back(*docs[i].label);
        guess.push_back(clf.predict(theta.row(i)));
      }
      return score_predictions(truth, guess, metrics.positive_label);
    };
    FoldMetrics m = predict_all(test, derive_seed(seed, {3, fi}));
    m.fold = f;
    if (!held.empty()) m.validation_f1 = predict_all(held, derive_seed(seed, {4, fi})).f1;
    folds[fi] = m;
    models[fi] = std::move(model);
  });

  std::vector<double> p, r;
  for (const auto& m : folds) {
    p.push_back(m.precision);
    r.push_back(m.recall);
  }
  metrics.precision = median(p);
  metrics.recall = median(r);
  metrics.f1 = fbeta(metrics.precision, metrics.recall, 1.0);
  metrics.f2 = fbeta(metrics.precision, metrics.recall, 2.0);
  metrics.per_fold = std::move(folds);
  if (trace) trace->fold_models = std::move(models);
  return metrics;
}

std::string metrics_json(const Metrics& metrics) {
  Json j;
  j["positive_label"] = metrics.positive_label;
  j["precision"] = round_sig(metrics.precision);
  j["recall"] = round_sig(metrics.recall);
  j["f1"] = round_sig(metrics.f1);
  j["f2"] = round_sig(metrics.f2);
  Json folds = Json::array();
  for (const auto& m : metrics.per_fold)
    folds.push_back({{"fold", m.fold},
                     {"precision", round_sig(m.precision)},
                     {"recall", round_sig(m.recall)},
                     {"f1", round_sig(m.f1)},
                     {"f2", round_sig(m.f2)},
                     {"tp", m.true_positive},
                     {"fp", m.false_positive},
                     {"fn", m.false_negative},
                     {"tn", m.true_negative},
                     {"validation_f1", round_sig(m.validation_f1)}});
  j["per_fold"] = folds;
  return dump_json(j);
}

}  // namespace ldade
