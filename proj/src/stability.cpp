#include "ldade/stability.hpp"

#include <algorithm>
#include <sstream>

#include "ldade/error.hpp"
#include "ldade/json_util.hpp"
#include "ldade/parallel.hpp"
#include "ldade/rng.hpp"

namespace ldade {

void StabilityConfig::validate() const {
  if (runs_m < 2) throw Error("runs (m) must be >= 2");
  if (repeats_j < 1) throw Error("repeats (j) must be >= 1");
  if (n_words < 1 || n_words > kMaxTopWords) throw Error("n must lie in [1, 9]");
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty list");
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

OverlapResult overlap(std::span<const TopicSnapshot> snapshots, int n, int k) {
  if (snapshots.empty()) throw Error("overlap needs at least one run");
  if (n < 1 || k < 1) throw Error("overlap needs n >= 1 and k >= 1");
  const auto un = static_cast<std::size_t>(n);
  const auto uk = static_cast<std::size_t>(k);

  // Top-n word sets as sorted vectors, so set equality is vector equality.
  std::vector<std::vector<std::vector<std::string>>> sets(snapshots.size());
  for (std::size_t r = 0; r < snapshots.size(); ++r) {
    const auto& topics = snapshots[r].topics;
    if (topics.size() < uk)
      throw Error("run " + std::to_string(r) + " has fewer than k topics");
    for (std::size_t t = 0; t < uk; ++t) {
      if (topics[t].size() < un)
        throw Error("run " + std::to_string(r) + " topic " + std::to_string(t) +
                    " has fewer than n words");
      std::vector<std::string> top(topics[t].begin(), topics[t].begin() + n);
      std::sort(top.begin(), top.end());
      sets[r].push_back(std::move(top));
    }
  }

  OverlapResult out;
  const double m = static_cast<double>(snapshots.size());
  for (std::size_t t = 0; t < uk; ++t) {
    const auto& reference = sets[0][t];
    std::size_t matched = 0;
    for (const auto& run : sets)
      if (std::find(run.begin(), run.end(), reference) != run.end()) ++matched;
    out.per_topic_fraction.push_back(static_cast<double>(matched) / m);
  }
  out.overlap_score = median(out.per_topic_fraction);
  return out;
}

double StabilityReport::score(int n) const {
  for (const auto& p : curve)
    if (p.n == n) return p.raw_score;
  throw Error("no stability score for n=" + std::to_string(n));
}

std::uint64_t run_shuffle_seed(std::uint64_t base_seed, int repeat, int run) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(run), 0});
}

std::uint64_t run_lda_seed(std::uint64_t base_seed, int repeat, int run) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(run), 1});
}

TopicSnapshot snapshot_of(const TopicModel& model, int run_index, std::size_t n) {
  TopicSnapshot snap;
  snap.run_index = run_index;
  for (std::size_t t = 0; t < model.num_topics(); ++t) snap.topics.push_back(top_words(model, t, n));
  return snap;
}

StabilityReport stability_curve(const LdaCandidate& candidate, const DocumentTermMatrix& matrix,
                                const StabilityConfig& config, int iterations) {
  config.validate();
  LdaParams params;
  params.k = trim_topic_count(candidate.k);
  params.alpha = candidate.alpha;
  params.beta = candidate.beta;
  params.iterations = iterations;
  params.validate();
  matrix.validate();

  const auto canonical = canonical_order(matrix);
  const auto top_n = std::min<std::size_t>(kMaxTopWords, canonical.num_terms());
  const auto m = static_cast<std::size_t>(config.runs_m);
  const auto j = static_cast<std::size_t>(config.repeats_j);

  std::vector<TopicSnapshot> snapshots(m * j);
  parallel_for(m * j, config.jobs, [&](std::size_t idx) {
    const int repeat = static_cast<int>(idx / m);
    const int run = static_cast<int>(idx % m);
    const auto data = shuffle(canonical, run_shuffle_seed(config.base_seed, repeat, run));
    LdaParams p = params;
    p.seed = run_lda_seed(config.base_seed, repeat, run);
    snapshots[idx] = snapshot_of(fit_gibbs(data, p), run, top_n);
  });

  StabilityReport report;
  report.config = config;
  report.k = params.k;
  report.alpha = params.alpha;
  report.beta = params.beta;
  report.iterations = iterations;
  report.lda_fits = static_cast<long long>(m * j);
  for (int n = 1; n <= static_cast<int>(top_n); ++n) {
    StabilityCurvePoint point;
    point.n = n;
    std::vector<double> scores;
    for (std::size_t r = 0; r < j; ++r) {
      std::span<const TopicSnapshot> runs(snapshots.data() + r * m, m);
      point.repeats.push_back(overlap(runs, n, params.k));
      scores.push_back(point.repeats.back().overlap_score);
    }
    point.raw_score = median(std::move(scores));
    report.curve.push_back(std::move(point));
  }
  return report;
}

double ldascore(int n, const LdaCandidate& candidate, const DocumentTermMatrix& matrix,
                const StabilityConfig& config, int iterations) {
  return stability_curve(candidate, matrix, config, iterations).score(n);
}

std::string stability_report_json(const StabilityReport& report) {
  Json j;
  j["k"] = report.k;
  j["alpha"] = round_sig(report.alpha);
  j["beta"] = round_sig(report.beta);
  j["iterations"] = report.iterations;
  j["runs"] = report.config.runs_m;
  j["repeats"] = report.config.repeats_j;
  j["base_seed"] = report.config.base_seed;
  j["lda_fits"] = report.lda_fits;
  Json scores = Json::object();
  Json detail = Json::array();
  for (const auto& p : report.curve) {
    scores[std::to_string(p.n)] = round_sig(p.raw_score);
    Json repeats = Json::array();
    for (const auto& r : p.repeats) {
      Json fractions = Json::array();
      for (double f : r.per_topic_fraction) fractions.push_back(round_sig(f));
      repeats.push_back({{"overlap_score", round_sig(r.overlap_score)},
                         {"per_topic_fraction", fractions}});
    }
    detail.push_back({{"n", p.n}, {"raw_score", round_sig(p.raw_score)}, {"repeats", repeats}});
  }
  j["raw_scores"] = scores;
  j["detail"] = detail;
  return dump_json(j);
}

std::string stability_report_csv(const StabilityReport& report) {
  std::ostringstream out;
  out << "n,raw_score\n";
  for (const auto& p : report.curve) out << p.n << ',' << format_real(p.raw_score) << '\n';
  return out.str();
}

}  // namespace ldade
