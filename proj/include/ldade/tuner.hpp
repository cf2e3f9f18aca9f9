#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"
#include "ldade/rng.hpp"
#include "ldade/stability.hpp"

namespace ldade {

/// Search box for <k, alpha, beta>. alpha and beta start at eps rather than
/// zero because the Dirichlet priors must be strictly positive.
struct Bounds {
  static constexpr double kEps = 1e-3;
  int k_min = 10;
  int k_max = 100;
  double alpha_min = kEps;
  double alpha_max = 1.0;
  double beta_min = kEps;
  double beta_max = 1.0;

  void validate() const;
};

struct Candidate {
  double k = 10;
  double alpha = 0.1;
  double beta = 0.1;
  std::optional<double> fitness;

  double operator[](std::size_t dim) const;
  double& operator[](std::size_t dim);
  LdaCandidate params() const { return {k, alpha, beta}; }
};

/// Clamps dimension `dim` (0 = k, 1 = alpha, 2 = beta) into bounds; k is
/// also rounded half-up to an integer.
double trim(std::size_t dim, double value, const Bounds& bounds);
Candidate trim(Candidate c, const Bounds& bounds);

struct DeConfig {
  int np = 10;
  double f = 0.7;
  double cr = 0.3;
  int generations = 3;
  int inner_repeats = 1;
  /// Repeats used to re-score the winner; 0 skips the re-score.
  int final_repeats = 10;
  /// Stop after this many fitness evaluations (0 = np * (1 + generations)).
  int max_evaluations = 0;

  void validate() const;
};

struct Evaluation {
  int generation = 0;  // 0 = initial population
  int slot = 0;
  Candidate candidate;  // trimmed; fitness set
  long long lda_fits = 0;
  double elapsed_ms = 0.0;  // wall clock, excluded from deterministic reports
};

struct TuningResult {
  Candidate best;
  /// Highest fitness seen during the search (equals best.fitness).
  double best_score = 0.0;
  /// Re-score of `best` at final_repeats; absent when final_repeats is 0.
  std::optional<StabilityReport> final_report;
  int evaluations = 0;
  std::vector<Evaluation> history;
  long long lda_fit_count = 0;
  std::chrono::duration<double> elapsed{0};
  /// Best fitness in the population after each generation (index 0 = initial).
  std::vector<double> best_by_generation;
};

/// Shared inputs of both tuners.
struct TuningProblem {
  const DocumentTermMatrix* matrix = nullptr;
  int n = 5;
  Bounds bounds;
  /// runs_m, jobs and base_seed apply to every evaluation; repeats_j is
  /// overridden by inner_repeats / final_repeats.
  StabilityConfig stability;
  int lda_iterations = 100;
};

/// Called after every evaluation, in evaluation order.
using EvaluationObserver = std::function<void(const Evaluation&)>;

/// DE mutation: picks three distinct members of `pop` other than slot
/// `old_slot`, then per dimension with probability cr takes
/// trim(a + f * (b - c)), otherwise keeps the old value.
Candidate extrapolate(const Candidate& old, std::size_t old_slot, std::span<const Candidate> pop,
                      double cr, double f, const Bounds& bounds, Rng& rng);

/// Highest fitness; ties go to smaller k, then alpha, then beta.
const Candidate& best_of(std::span<const Candidate> pop);

Candidate random_candidate(const Bounds& bounds, Rng& rng);

TuningResult tune_de(const TuningProblem& problem, const DeConfig& de, std::uint64_t seed,
                     const EvaluationObserver& observer = {});

/// `budget` uniform samples, each scored like a DE evaluation, best re-scored.
TuningResult random_search(const TuningProblem& problem, int budget, int inner_repeats,
                           int final_repeats, std::uint64_t seed,
                           const EvaluationObserver& observer = {});

/// Seed of the stability base for evaluation number `index` of a run.
std::uint64_t evaluation_seed(std::uint64_t seed, int index);
std::uint64_t final_rescore_seed(std::uint64_t seed);

/// One JSON object per line: generation, k, alpha, beta, fitness, lda_fits, elapsed_ms.
std::string evaluation_log_line(const Evaluation& e);

std::string tuning_result_json(const TuningResult& result);

}  // namespace ldade
