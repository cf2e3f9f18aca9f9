#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"

namespace ldade {

/// Row-major dense matrix of doubles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

struct LdaParams {
  int k = 10;
  double alpha = 0.1;
  double beta = 0.1;
  int iterations = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Tuners search k over the reals; the sampler needs a topic count.
/// Rounds half-up and clamps to at least one topic.
int trim_topic_count(double k);

/// Read-only view of the sampler tallies, handed to sweep observers.
struct GibbsTallies {
  std::size_t num_docs;
  std::size_t num_topics;
  std::size_t num_terms;
  std::span<const int> doc_topic;         // D x k
  std::span<const int> term_topic;        // V x k (term-major, as the sampler stores it)
  std::span<const std::int64_t> topic_total;  // k
};

using SweepObserver = std::function<void(int sweep, const GibbsTallies&)>;

struct TopicModel {
  LdaParams params;
  std::shared_ptr<const Vocabulary> vocabulary;
  std::vector<std::string> doc_ids;
  DenseMatrix phi;    // k x V, rows sum to 1
  DenseMatrix theta;  // D x k, rows sum to 1
  std::vector<int> doc_topic;              // n_{d,t}, D x k
  std::vector<int> topic_term;             // n_{t,w}, k x V
  std::vector<std::int64_t> topic_total;   // n_t
  std::vector<std::string> warnings;

  std::size_t num_topics() const { return phi.rows; }
  std::size_t num_terms() const { return phi.cols; }
  std::size_t num_docs() const { return theta.rows; }
};

/// Collapsed Gibbs sampling with symmetric priors. A single generator seeded
/// from params.seed is consumed in document-major, token-major order, so the
/// same (row order, params) always yields the same model and a different row
/// order generally does not.
TopicModel fit_gibbs(const DocumentTermMatrix& matrix, const LdaParams& params,
                     const SweepObserver& observer = {});

/// phi_{t,w} = (n_{t,w} + beta) / (n_t + V * beta), from k x V tallies.
DenseMatrix estimate_phi(std::span<const int> topic_term, std::size_t k, std::size_t num_terms,
                         double beta);

/// theta_{d,t} = (n_{d,t} + alpha) / (n_d + k * alpha), from D x k tallies.
DenseMatrix estimate_theta(std::span<const int> doc_topic, std::size_t num_docs, std::size_t k,
                           double alpha);

/// The n highest-weight terms of a topic, heaviest first, ties to the
/// lexicographically smaller term.
std::vector<std::string> top_words(const TopicModel& model, std::size_t topic, std::size_t n);

/// Same ordering as top_words, returning term indices.
std::vector<int> top_word_indices(const TopicModel& model, std::size_t topic, std::size_t n);

/// Document-topic proportions used as classifier features (theta).
const DenseMatrix& doc_topic_features(const TopicModel& model);

/// Topic proportions for unseen documents with phi frozen: `sweeps` Gibbs
/// sweeps sampling z from (n_{d,t} + alpha) * phi_{t,w}. Rows of `docs` must
/// index the model's vocabulary. Empty rows get the uniform distribution.
DenseMatrix fold_in(const TopicModel& model, std::span<const SparseRow> docs, int sweeps,
                    std::uint64_t seed);

/// Throws Error when phi or theta rows do not sum to one within tol or an
/// entry leaves (0, 1], or when the tallies disagree with each other.
void check_model_invariants(const TopicModel& model, double tol = 1e-9);

/// JSON export: params, vocabulary terms, phi and theta as row-major arrays
/// of reals rounded to 12 significant digits.
std::string model_to_json(const TopicModel& model);

}  // namespace ldade
