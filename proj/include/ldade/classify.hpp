#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"
#include "ldade/lda.hpp"

namespace ldade {

/// F_beta = (1 + beta^2) p r / (beta^2 p + r); zero when p = r = 0.
double fbeta(double precision, double recall, double beta);

/// Stratified k-fold plan. Fold f tests on its own documents (20% at five
/// folds); the remaining documents are split into training (65% of the
/// whole) and a validation share (15% of the whole), stratified by label.
struct FoldPlan {
  int folds = 5;
  std::vector<int> fold_of;                         // test fold per document
  std::vector<std::vector<std::size_t>> validation;  // per fold, sorted doc indices

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;  // excludes validation
  std::vector<std::size_t> validation_indices(int fold) const { return validation.at(fold); }
};

inline constexpr double kValidationShare = 0.15;

FoldPlan make_folds(std::span<const std::string> labels, int folds, std::uint64_t seed);

struct SvmOptions {
  double lambda = 1e-3;
  int epochs = 200;
  std::uint64_t seed = 0;
};

/// sign(w . x + b); the bias is learned as the weight of a constant feature.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

/// L2-regularized hinge loss minimized by stochastic subgradient descent with
/// step 1/(lambda t), visiting examples in a seeded order each epoch.
/// labels are +1 / -1.
LinearModel train_linear(const DenseMatrix& features, std::span<const int> labels,
                         const SvmOptions& options);

/// Binary classifier for two classes, one-vs-rest linear models otherwise.
struct Classifier {
  std::vector<std::string> classes;  // sorted
  std::vector<LinearModel> models;   // one (binary: classes[1] vs classes[0]) or one per class

  std::string predict(std::span<const double> x) const;
};

Classifier train_classifier(const DenseMatrix& features, std::span<const std::string> labels,
                            const SvmOptions& options);

struct FoldMetrics {
  int fold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  int true_positive = 0;
  int false_positive = 0;
  int false_negative = 0;
  int true_negative = 0;
  /// Same classifier scored on the validation share (reported only).
  double validation_f1 = 0.0;
};

struct Metrics {
  std::string positive_label;
  /// Medians over folds; f1 and f2 follow from them.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  std::vector<FoldMetrics> per_fold;
};

/// Counts for one class treated as positive.
FoldMetrics score_predictions(std::span<const std::string> truth,
                              std::span<const std::string> predicted,
                              const std::string& positive_label);

struct PipelineConfig {
  PreprocessConfig preprocess;
  /// k, alpha, beta and iterations; the seed is derived per fold.
  LdaParams lda;
  int folds = 5;
  int fold_in_sweeps = 20;
  SvmOptions svm;
  /// Defaults to the lexicographically last label.
  std::optional<std::string> positive_label;
  int jobs = 1;
};

/// Vocabulary selection and LDA on training documents only. Documents left
/// empty by the training vocabulary are dropped from the LDA input.
TopicModel fit_fold_lda(std::span<const RawDocument> train_docs, const PipelineConfig& config,
                        std::uint64_t seed);

/// Fitted per-fold state, for inspection.
struct PipelineTrace {
  std::vector<TopicModel> fold_models;
};

/// Stratified cross-validation of LDA topic features + linear classifier.
Metrics evaluate_pipeline(std::span<const RawDocument> corpus, const PipelineConfig& config,
                          std::uint64_t seed, PipelineTrace* trace = nullptr);

std::string metrics_json(const Metrics& metrics);

}  // namespace ldade
