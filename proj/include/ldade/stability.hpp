#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldade/corpus.hpp"
#include "ldade/lda.hpp"

namespace ldade {

/// Largest top-n studied; topics are extracted once at this size.
inline constexpr int kMaxTopWords = 9;

struct StabilityConfig {
  int runs_m = 10;
  int repeats_j = 10;
  int n_words = 5;
  std::uint64_t base_seed = 0;
  /// Maximum concurrent LDA fits. Results do not depend on it.
  int jobs = 1;

  void validate() const;
};

/// Top words of every topic of one LDA run, heaviest first.
struct TopicSnapshot {
  int run_index = 0;
  std::vector<std::vector<std::string>> topics;
};

struct OverlapResult {
  /// One entry per topic of the reference run: matching runs / m.
  std::vector<double> per_topic_fraction;
  double overlap_score = 0.0;
};

/// Stability of the reference run (snapshots[0]): a reference topic matches
/// run r when some topic of r has the same top-n word set. The reference run
/// matches itself, so every fraction is at least 1/m.
OverlapResult overlap(std::span<const TopicSnapshot> snapshots, int n, int k);

/// Median; an even count averages the two middle values.
double median(std::vector<double> values);

/// LDA hyperparameters under evaluation. k may arrive as a real from a tuner.
struct LdaCandidate {
  double k = 10;
  double alpha = 0.1;
  double beta = 0.1;
};

struct StabilityCurvePoint {
  int n = 0;
  double raw_score = 0.0;
  std::vector<OverlapResult> repeats;  // one per repeat j
};

struct StabilityReport {
  StabilityConfig config;
  int k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  int iterations = 0;
  /// n = 1 .. min(9, V), in order.
  std::vector<StabilityCurvePoint> curve;
  long long lda_fits = 0;

  /// Raw score at n; throws when n is outside the curve.
  double score(int n) const;
};

/// Seed of the shuffle and of the LDA fit for run i of repeat j.
std::uint64_t run_shuffle_seed(std::uint64_t base_seed, int repeat, int run);
std::uint64_t run_lda_seed(std::uint64_t base_seed, int repeat, int run);

/// Order-shuffled stability score for every n in 1..min(9, V) in one pass.
/// For each repeat, runs_m LDA fits are made on seeded shuffles of the
/// canonical (doc id sorted) row order; the per-n raw score is the median of
/// the repeats' overlap scores.
StabilityReport stability_curve(const LdaCandidate& candidate, const DocumentTermMatrix& matrix,
                                const StabilityConfig& config, int iterations);

/// Raw score at config.n_words.
double ldascore(int n, const LdaCandidate& candidate, const DocumentTermMatrix& matrix,
                const StabilityConfig& config, int iterations);

/// Snapshot of one fitted model, keeping the top `n` words of every topic.
TopicSnapshot snapshot_of(const TopicModel& model, int run_index, std::size_t n);

std::string stability_report_json(const StabilityReport& report);
/// `n,raw_score` rows.
std::string stability_report_csv(const StabilityReport& report);

}  // namespace ldade
