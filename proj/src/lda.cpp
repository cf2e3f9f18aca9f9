#include "ldade/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldade/error.hpp"
#include "ldade/json_util.hpp"
#include "ldade/rng.hpp"

namespace ldade {

void LdaParams::validate() const {
  if (k < 1) throw Error("k must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("beta must be > 0");
  if (iterations < 1) throw Error("iterations must be >= 1");
}

int trim_topic_count(double k) {
  if (!std::isfinite(k)) throw Error("topic count is not finite");
  const double rounded = std::floor(k + 0.5);
  return rounded < 1.0 ? 1 : static_cast<int>(rounded);
}

namespace {

// Draws an index from unnormalized cumulative weights.
inline std::size_t draw_cumulative(const double* cumulative, std::size_t n, double u) {
  const double target = u * cumulative[n - 1];
  for (std::size_t t = 0; t + 1 < n; ++t)
    if (target < cumulative[t]) return t;
  return n - 1;
}

// Exact collapsed-Gibbs draw with the conditional split into three buckets:
//   (n_dt + a)(n_tw + b)/(n_t + Vb) = a b/(n_t + Vb)          smoothing
//                                   + n_dt b/(n_t + Vb)        document
//                                   + (n_dt + a) n_tw/(n_t + Vb) word
// The word bucket only visits topics with n_tw > 0 and the document bucket
// only topics with n_dt > 0, so cost follows the tallies' sparsity, not k.
class SparseSampler {
 public:
  SparseSampler(std::size_t k, std::size_t num_terms, double alpha, double beta,
                std::vector<int>& term_topic, std::vector<std::int64_t>& topic_total)
      : k_(k),
        alpha_(alpha),
        beta_(beta),
        vbeta_(static_cast<double>(num_terms) * beta),
        term_topic_(term_topic),
        topic_total_(topic_total),
        denom_inv_(k),
        coef_(k),
        word_nz_(num_terms),
        word_pos_(num_terms * k, -1),
        doc_pos_(k, -1),
        q_(k) {
    for (std::size_t w = 0; w < num_terms; ++w)
      for (std::size_t t = 0; t < k; ++t)
        if (term_topic_[w * k + t] > 0) add_word_topic(w, t);
  }

  // Smoothing mass is recomputed from scratch each sweep to stop drift.
  void begin_sweep() {
    s_ = 0.0;
    for (std::size_t t = 0; t < k_; ++t) {
      denom_inv_[t] = 1.0 / (static_cast<double>(topic_total_[t]) + vbeta_);
      coef_[t] = alpha_ * denom_inv_[t];
      s_ += alpha_ * beta_ * denom_inv_[t];
    }
  }

  // `topics` are the current assignments of the document's tokens.
  void begin_document(const int* nd, std::span<const int> topics) {
    r_ = 0.0;
    doc_nz_.clear();
    for (int t : topics)
      if (doc_pos_[t] < 0) {
        doc_pos_[t] = static_cast<int>(doc_nz_.size());
        doc_nz_.push_back(t);
        r_ += nd[t] * beta_ * denom_inv_[t];
        coef_[t] = (nd[t] + alpha_) * denom_inv_[t];
      }
  }

  void end_document() {
    for (int t : doc_nz_) {
      coef_[t] = alpha_ * denom_inv_[t];
      doc_pos_[t] = -1;
    }
  }

  int resample(int* nd, int word, int old, double u) {
    const auto w = static_cast<std::size_t>(word);
    int* nw = &term_topic_[w * k_];
    update(nd, nw, w, static_cast<std::size_t>(old), -1);

    const auto& nz = word_nz_[w];
    double q = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) {
      const int t = nz[i];
      q_[i] = coef_[t] * nw[t];
      q += q_[i];
    }

    double target = u * (s_ + r_ + q);
    std::size_t fresh = k_;
    if (target < q) {
      for (std::size_t i = 0; i < nz.size(); ++i) {
        target -= q_[i];
        if (target < 0.0) {
          fresh = static_cast<std::size_t>(nz[i]);
          break;
        }
      }
      if (fresh == k_) fresh = static_cast<std::size_t>(nz.back());
    } else if (target -= q; !doc_nz_.empty() && target < r_) {
      for (int t : doc_nz_) {
        target -= nd[t] * beta_ * denom_inv_[t];
        if (target < 0.0) {
          fresh = static_cast<std::size_t>(t);
          break;
        }
      }
      if (fresh == k_) fresh = static_cast<std::size_t>(doc_nz_.back());
    } else {
      target -= r_;
      for (std::size_t t = 0; t < k_; ++t) {
        target -= alpha_ * beta_ * denom_inv_[t];
        if (target < 0.0) {
          fresh = t;
          break;
        }
      }
      if (fresh == k_) fresh = k_ - 1;
    }

    update(nd, nw, w, fresh, +1);
    return static_cast<int>(fresh);
  }

 private:
  void update(int* nd, int* nw, std::size_t w, std::size_t t, int delta) {
    s_ -= alpha_ * beta_ * denom_inv_[t];
    r_ -= nd[t] * beta_ * denom_inv_[t];
    nd[t] += delta;
    nw[t] += delta;
    topic_total_[t] += delta;
    denom_inv_[t] = 1.0 / (static_cast<double>(topic_total_[t]) + vbeta_);
    s_ += alpha_ * beta_ * denom_inv_[t];
    r_ += nd[t] * beta_ * denom_inv_[t];
    coef_[t] = (nd[t] + alpha_) * denom_inv_[t];

    if (delta > 0 && nw[t] == 1) add_word_topic(w, t);
    if (delta < 0 && nw[t] == 0) remove_word_topic(w, t);
    if (delta > 0 && nd[t] == 1) {
      doc_pos_[t] = static_cast<int>(doc_nz_.size());
      doc_nz_.push_back(static_cast<int>(t));
    }
    if (delta < 0 && nd[t] == 0) {
      const int pos = doc_pos_[t];
      const int last = doc_nz_.back();
      doc_nz_[static_cast<std::size_t>(pos)] = last;
      doc_pos_[static_cast<std::size_t>(last)] = pos;
      doc_nz_.pop_back();
      doc_pos_[t] = -1;
    }
  }

  void add_word_topic(std::size_t w, std::size_t t) {
    word_pos_[w * k_ + t] = static_cast<int>(word_nz_[w].size());
    word_nz_[w].push_back(static_cast<int>(t));
  }

  void remove_word_topic(std::size_t w, std::size_t t) {
    auto& list = word_nz_[w];
    const int pos = word_pos_[w * k_ + t];
    const int last = list.back();
    list[static_cast<std::size_t>(pos)] = last;
    word_pos_[w * k_ + static_cast<std::size_t>(last)] = pos;
    list.pop_back();
    word_pos_[w * k_ + t] = -1;
  }

  std::size_t k_;
  double alpha_;
  double beta_;
  double vbeta_;
  std::vector<int>& term_topic_;
  std::vector<std::int64_t>& topic_total_;
  std::vector<double> denom_inv_;
  std::vector<double> coef_;  // (n_dt + alpha) / (n_t + V beta) for the current document
  std::vector<std::vector<int>> word_nz_;
  std::vector<int> word_pos_;
  std::vector<int> doc_nz_;
  std::vector<int> doc_pos_;
  std::vector<double> q_;
  double s_ = 0.0;
  double r_ = 0.0;
};

}  // namespace

DenseMatrix estimate_phi(std::span<const int> topic_term, std::size_t k, std::size_t num_terms,
                         double beta) {
  DenseMatrix phi(k, num_terms);
  const double vbeta = static_cast<double>(num_terms) * beta;
  for (std::size_t t = 0; t < k; ++t) {
    std::int64_t total = 0;
    for (std::size_t w = 0; w < num_terms; ++w) total += topic_term[t * num_terms + w];
    const double denom = static_cast<double>(total) + vbeta;
    for (std::size_t w = 0; w < num_terms; ++w)
      phi(t, w) = (topic_term[t * num_terms + w] + beta) / denom;
  }
  return phi;
}

DenseMatrix estimate_theta(std::span<const int> doc_topic, std::size_t num_docs, std::size_t k,
                           double alpha) {
  DenseMatrix theta(num_docs, k);
  const double kalpha = static_cast<double>(k) * alpha;
  for (std::size_t d = 0; d < num_docs; ++d) {
    std::int64_t total = 0;
    for (std::size_t t = 0; t < k; ++t) total += doc_topic[d * k + t];
    const double denom = static_cast<double>(total) + kalpha;
    for (std::size_t t = 0; t < k; ++t) theta(d, t) = (doc_topic[d * k + t] + alpha) / denom;
  }
  return theta;
}

TopicModel fit_gibbs(const DocumentTermMatrix& matrix, const LdaParams& params,
                     const SweepObserver& observer) {
  params.validate();
  matrix.validate();
  const std::size_t num_docs = matrix.num_docs();
  const std::size_t num_terms = matrix.num_terms();
  const auto k = static_cast<std::size_t>(params.k);
  const double alpha = params.alpha;
  const double beta = params.beta;

  // Token stream in document-major order; within a document, terms ascend.
  std::vector<int> words;
  std::vector<std::size_t> doc_start(num_docs + 1, 0);
  words.reserve(static_cast<std::size_t>(matrix.total_tokens()));
  for (std::size_t d = 0; d < num_docs; ++d) {
    doc_start[d] = words.size();
    for (const auto& tc : matrix.rows[d]) words.insert(words.end(), tc.count, tc.term);
  }
  doc_start[num_docs] = words.size();

  std::vector<int> doc_topic(num_docs * k, 0);
  std::vector<int> term_topic(num_terms * k, 0);
  std::vector<std::int64_t> topic_total(k, 0);
  std::vector<int> z(words.size());

  Rng rng(params.seed);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto t = static_cast<int>(rng.below(k));
    z[i] = t;
  }
  for (std::size_t d = 0; d < num_docs; ++d) {
    for (std::size_t i = doc_start[d]; i < doc_start[d + 1]; ++i) {
      ++doc_topic[d * k + z[i]];
      ++term_topic[static_cast<std::size_t>(words[i]) * k + z[i]];
      ++topic_total[z[i]];
    }
  }

  SparseSampler sampler(k, num_terms, alpha, beta, term_topic, topic_total);
  for (int sweep = 0; sweep < params.iterations; ++sweep) {
    sampler.begin_sweep();
    for (std::size_t d = 0; d < num_docs; ++d) {
      int* nd = &doc_topic[d * k];
      const std::span<int> doc_z(z.data() + doc_start[d], z.data() + doc_start[d + 1]);
      sampler.begin_document(nd, doc_z);
      for (std::size_t i = doc_start[d]; i < doc_start[d + 1]; ++i)
        z[i] = sampler.resample(nd, words[i], z[i], rng.uniform());
      sampler.end_document();
    }
    if (observer)
      observer(sweep, GibbsTallies{num_docs, k, num_terms, doc_topic, term_topic, topic_total});
  }

  TopicModel model;
  model.params = params;
  model.vocabulary = matrix.vocabulary;
  model.doc_ids = matrix.doc_ids;
  model.topic_term.assign(k * num_terms, 0);
  for (std::size_t w = 0; w < num_terms; ++w)
    for (std::size_t t = 0; t < k; ++t) model.topic_term[t * num_terms + w] = term_topic[w * k + t];
  model.doc_topic = std::move(doc_topic);
  model.topic_total = std::move(topic_total);
  model.phi = estimate_phi(model.topic_term, k, num_terms, beta);
  model.theta = estimate_theta(model.doc_topic, num_docs, k, alpha);
  if (k > num_docs)
    model.warnings.push_back("k=" + std::to_string(k) + " exceeds the document count " +
                             std::to_string(num_docs));
  check_model_invariants(model);
  return model;
}

std::vector<int> top_word_indices(const TopicModel& model, std::size_t topic, std::size_t n) {
  if (topic >= model.num_topics()) throw Error("topic index out of range");
  if (n < 1 || n > model.num_terms()) throw Error("top-n must lie in [1, V]");
  const auto row = model.phi.row(topic);
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Terms are stored in lexicographic order, so the smaller index wins ties.
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](int a, int b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  idx.resize(n);
  return idx;
}

std::vector<std::string> top_words(const TopicModel& model, std::size_t topic, std::size_t n) {
  std::vector<std::string> out;
  for (int i : top_word_indices(model, topic, n)) out.push_back(model.vocabulary->terms[i]);
  return out;
}

const DenseMatrix& doc_topic_features(const TopicModel& model) { return model.theta; }

DenseMatrix fold_in(const TopicModel& model, std::span<const SparseRow> docs, int sweeps,
                    std::uint64_t seed) {
  if (sweeps < 1) throw Error("fold-in needs at least one sweep");
  const std::size_t k = model.num_topics();
  const std::size_t num_terms = model.num_terms();
  const double alpha = model.params.alpha;
  DenseMatrix theta(docs.size(), k);
  Rng rng(seed);
  std::vector<double> cumulative(k);
  std::vector<int> nd(k);
  std::vector<int> words;
  std::vector<int> z;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    words.clear();
    for (const auto& tc : docs[d]) {
      if (tc.term < 0 || static_cast<std::size_t>(tc.term) >= num_terms)
        throw Error("fold-in document references a term outside the vocabulary");
      words.insert(words.end(), tc.count, tc.term);
    }
    std::fill(nd.begin(), nd.end(), 0);
    z.assign(words.size(), 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
      z[i] = static_cast<int>(rng.below(k));
      ++nd[z[i]];
    }
    for (int s = 0; s < sweeps && !words.empty(); ++s) {
      for (std::size_t i = 0; i < words.size(); ++i) {
        --nd[z[i]];
        double sum = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          sum += (nd[t] + alpha) * model.phi(t, static_cast<std::size_t>(words[i]));
          cumulative[t] = sum;
        }
        z[i] = static_cast<int>(draw_cumulative(cumulative.data(), k, rng.uniform()));
        ++nd[z[i]];
      }
    }
    const double denom = static_cast<double>(words.size()) + static_cast<double>(k) * alpha;
    for (std::size_t t = 0; t < k; ++t) theta(d, t) = (nd[t] + alpha) / denom;
  }
  return theta;
}

void check_model_invariants(const TopicModel& model, double tol) {
  auto check_rows = [&](const DenseMatrix& m, const char* name) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      double s = 0.0;
      for (double x : m.row(r)) {
        if (!(x > 0.0 && x <= 1.0)) throw Error(std::string(name) + " entry outside (0, 1]");
        s += x;
      }
      if (std::abs(s - 1.0) > tol)
        throw Error(std::string(name) + " row " + std::to_string(r) + " sums to " +
                    std::to_string(s));
    }
  };
  check_rows(model.phi, "phi");
  check_rows(model.theta, "theta");

  const std::size_t k = model.num_topics();
  const std::size_t v = model.num_terms();
  std::int64_t by_topic = 0;
  for (std::size_t t = 0; t < k; ++t) {
    std::int64_t row = 0;
    for (std::size_t w = 0; w < v; ++w) row += model.topic_term[t * v + w];
    if (row != model.topic_total[t]) throw Error("topic-term tallies disagree with topic totals");
    by_topic += row;
  }
  const std::int64_t by_doc =
      std::accumulate(model.doc_topic.begin(), model.doc_topic.end(), std::int64_t{0});
  if (by_doc != by_topic) throw Error("document-topic tallies disagree with topic totals");
}

std::string model_to_json(const TopicModel& model) {
  auto rounded = [](const DenseMatrix& m) {
    Json arr = Json::array();
    for (double x : m.data) arr.push_back(round_sig(x));
    return arr;
  };
  Json j;
  j["params"] = {{"k", model.params.k},
                 {"alpha", round_sig(model.params.alpha)},
                 {"beta", round_sig(model.params.beta)},
                 {"iterations", model.params.iterations},
                 {"seed", model.params.seed}};
  j["vocabulary"] = model.vocabulary->terms;
  j["doc_ids"] = model.doc_ids;
  j["phi"] = {{"rows", model.phi.rows}, {"cols", model.phi.cols}, {"data", rounded(model.phi)}};
  j["theta"] = {
      {"rows", model.theta.rows}, {"cols", model.theta.cols}, {"data", rounded(model.theta)}};
  return dump_json(j);
}

}  // namespace ldade
