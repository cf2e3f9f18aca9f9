#include "ldade/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "ldade/error.hpp"
#include "ldade/json_util.hpp"

namespace ldade {

void Bounds::validate() const {
  if (k_min < 1 || k_max < k_min) throw Error("k bounds must satisfy 1 <= k_min <= k_max");
  if (!(alpha_min > 0.0) || alpha_max < alpha_min)
    throw Error("alpha bounds must satisfy 0 < alpha_min <= alpha_max");
  if (!(beta_min > 0.0) || beta_max < beta_min)
    throw Error("beta bounds must satisfy 0 < beta_min <= beta_max");
}

void DeConfig::validate() const {
  if (np < 4) throw Error("DE population must hold at least 4 candidates");
  if (!(f >= 0.0 && f <= 2.0)) throw Error("DE weight f must lie in [0, 2]");
  if (!(cr >= 0.0 && cr <= 1.0)) throw Error("DE crossover cr must lie in [0, 1]");
  if (generations < 1) throw Error("DE needs at least one generation");
  if (inner_repeats < 1) throw Error("inner_repeats must be >= 1");
  if (final_repeats < 0) throw Error("final_repeats must be >= 0");
  if (max_evaluations != 0 && max_evaluations < np)
    throw Error("an evaluation budget must cover the initial population");
}

double Candidate::operator[](std::size_t dim) const {
  switch (dim) {
    case 0: return k;
    case 1: return alpha;
    case 2: return beta;
    default: throw Error("candidate has three dimensions");
  }
}

double& Candidate::operator[](std::size_t dim) {
  switch (dim) {
    case 0: return k;
    case 1: return alpha;
    case 2: return beta;
    default: throw Error("candidate has three dimensions");
  }
}

double trim(std::size_t dim, double value, const Bounds& b) {
  switch (dim) {
    case 0:
      return static_cast<double>(
          std::clamp(trim_topic_count(std::clamp(value, -1e9, 1e9)), b.k_min, b.k_max));
    case 1: return std::clamp(value, b.alpha_min, b.alpha_max);
    case 2: return std::clamp(value, b.beta_min, b.beta_max);
    default: throw Error("candidate has three dimensions");
  }
}

Candidate trim(Candidate c, const Bounds& bounds) {
  for (std::size_t d = 0; d < 3; ++d) c[d] = trim(d, c[d], bounds);
  return c;
}

Candidate extrapolate(const Candidate& old, std::size_t old_slot, std::span<const Candidate> pop,
                      double cr, double f, const Bounds& bounds, Rng& rng) {
  if (pop.size() < 4) throw Error("extrapolate needs a population of at least 4");
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (i != old_slot) others.push_back(i);
  // Partial Fisher-Yates: the first three entries become a, b, c.
  for (std::size_t i = 0; i < 3; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(others.size() - i));
    std::swap(others[i], others[j]);
  }
  const Candidate& a = pop[others[0]];
  const Candidate& b = pop[others[1]];
  const Candidate& c = pop[others[2]];

  Candidate out = old;
  out.fitness.reset();
  for (std::size_t d = 0; d < 3; ++d) {
    if (cr <= rng.uniform()) continue;
    out[d] = trim(d, a[d] + f * (b[d] - c[d]), bounds);
  }
  return out;
}

const Candidate& best_of(std::span<const Candidate> pop) {
  if (pop.empty()) throw Error("best_of on an empty population");
  auto better = [](const Candidate& x, const Candidate& y) {
    const double fx = x.fitness.value_or(-1.0);
    const double fy = y.fitness.value_or(-1.0);
    if (fx != fy) return fx > fy;
    return std::tie(x.k, x.alpha, x.beta) < std::tie(y.k, y.alpha, y.beta);
  };
  const Candidate* best = &pop[0];
  for (const auto& c : pop)
    if (better(c, *best)) best = &c;
  return *best;
}

Candidate random_candidate(const Bounds& bounds, Rng& rng) {
  Candidate c;
  c.k = static_cast<double>(rng.between(bounds.k_min, bounds.k_max));
  c.alpha = rng.uniform(bounds.alpha_min, bounds.alpha_max);
  c.beta = rng.uniform(bounds.beta_min, bounds.beta_max);
  return c;
}

std::uint64_t evaluation_seed(std::uint64_t seed, int index) {
  return derive_seed(seed, {1, static_cast<std::uint64_t>(index)});
}

std::uint64_t final_rescore_seed(std::uint64_t seed) { return derive_seed(seed, {2}); }

namespace {

class Evaluator {
 public:
  Evaluator(const TuningProblem& problem, int inner_repeats, std::uint64_t seed,
            const EvaluationObserver& observer, TuningResult& result)
      : problem_(problem),
        inner_repeats_(inner_repeats),
        seed_(seed),
        observer_(observer),
        result_(result) {}

  Candidate operator()(Candidate c, int generation, int slot) {
    const auto start = std::chrono::steady_clock::now();
    StabilityConfig cfg = problem_.stability;
    cfg.repeats_j = inner_repeats_;
    cfg.base_seed = evaluation_seed(seed_, result_.evaluations);
    const auto report = stability_curve(c.params(), *problem_.matrix, cfg, problem_.lda_iterations);
    c.fitness = report.score(problem_.n);

    Evaluation e;
    e.generation = generation;
    e.slot = slot;
    e.candidate = c;
    e.lda_fits = report.lda_fits;
    e.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    ++result_.evaluations;
    result_.lda_fit_count += report.lda_fits;
    result_.history.push_back(e);
    if (observer_) observer_(e);
    return c;
  }

 private:
  const TuningProblem& problem_;
  int inner_repeats_;
  std::uint64_t seed_;
  const EvaluationObserver& observer_;
  TuningResult& result_;
};

void validate_problem(const TuningProblem& problem) {
  if (problem.matrix == nullptr) throw Error("tuning problem has no matrix");
  problem.bounds.validate();
  StabilityConfig probe = problem.stability;
  probe.n_words = problem.n;
  probe.validate();
  if (problem.lda_iterations < 1) throw Error("LDA iterations must be >= 1");
}

void finish(const TuningProblem& problem, const Candidate& best, int final_repeats,
            std::uint64_t seed, std::chrono::steady_clock::time_point start,
            TuningResult& result) {
  result.best = best;
  result.best_score = best.fitness.value_or(0.0);
  if (final_repeats > 0) {
    StabilityConfig cfg = problem.stability;
    cfg.repeats_j = final_repeats;
    cfg.base_seed = final_rescore_seed(seed);
    result.final_report =
        stability_curve(best.params(), *problem.matrix, cfg, problem.lda_iterations);
    result.lda_fit_count += result.final_report->lda_fits;
  }
  result.elapsed = std::chrono::steady_clock::now() - start;
}

}  // namespace

TuningResult tune_de(const TuningProblem& problem, const DeConfig& de, std::uint64_t seed,
                     const EvaluationObserver& observer) {
  validate_problem(problem);
  de.validate();
  const auto start = std::chrono::steady_clock::now();
  const int budget = de.max_evaluations > 0 ? de.max_evaluations : de.np * (1 + de.generations);

  TuningResult result;
  Evaluator evaluate(problem, de.inner_repeats, seed, observer, result);
  Rng rng(derive_seed(seed, {0}));

  std::vector<Candidate> current;
  for (int i = 0; i < de.np; ++i) current.push_back(random_candidate(problem.bounds, rng));
  for (int i = 0; i < de.np; ++i) current[i] = evaluate(current[i], 0, i);
  result.best_by_generation.push_back(*best_of(current).fitness);

  for (int g = 1; g <= de.generations && result.evaluations < budget; ++g) {
    // Challengers are built from the generation's frozen population, then
    // scored, then accepted slot by slot.
    std::vector<Candidate> challengers;
    for (int j = 0; j < de.np; ++j)
      challengers.push_back(extrapolate(current[j], static_cast<std::size_t>(j), current, de.cr,
                                        de.f, problem.bounds, rng));
    std::vector<Candidate> next = current;
    for (int j = 0; j < de.np && result.evaluations < budget; ++j) {
      const Candidate scored = evaluate(challengers[j], g, j);
      if (*scored.fitness >= *current[j].fitness) next[j] = scored;
    }
    current = std::move(next);
    result.best_by_generation.push_back(*best_of(current).fitness);
  }

  finish(problem, best_of(current), de.final_repeats, seed, start, result);
  return result;
}

TuningResult random_search(const TuningProblem& problem, int budget, int inner_repeats,
                           int final_repeats, std::uint64_t seed,
                           const EvaluationObserver& observer) {
  validate_problem(problem);
  if (budget < 1) throw Error("random search budget must be >= 1");
  if (inner_repeats < 1) throw Error("inner_repeats must be >= 1");
  if (final_repeats < 0) throw Error("final_repeats must be >= 0");
  const auto start = std::chrono::steady_clock::now();

  TuningResult result;
  Evaluator evaluate(problem, inner_repeats, seed, observer, result);
  Rng rng(derive_seed(seed, {0}));
  std::vector<Candidate> sampled;
  for (int i = 0; i < budget; ++i)
    sampled.push_back(evaluate(random_candidate(problem.bounds, rng), 0, i));
  result.best_by_generation.push_back(*best_of(sampled).fitness);
  finish(problem, best_of(sampled), final_repeats, seed, start, result);
  return result;
}

std::string evaluation_log_line(const Evaluation& e) {
  Json j;
  j["generation"] = e.generation;
  j["k"] = static_cast<int>(e.candidate.k);
  j["alpha"] = round_sig(e.candidate.alpha);
  j["beta"] = round_sig(e.candidate.beta);
  j["fitness"] = round_sig(e.candidate.fitness.value_or(0.0));
  j["lda_fits"] = e.lda_fits;
  j["elapsed_ms"] = round_sig(e.elapsed_ms, 6);
  return j.dump() + "\n";
}

std::string tuning_result_json(const TuningResult& result) {
  Json j;
  j["best"] = {{"k", static_cast<int>(result.best.k)},
               {"alpha", round_sig(result.best.alpha)},
               {"beta", round_sig(result.best.beta)},
               {"fitness", round_sig(result.best.fitness.value_or(0.0))}};
  j["best_score"] = round_sig(result.best_score);
  j["evaluations"] = result.evaluations;
  j["lda_fit_count"] = result.lda_fit_count;
  Json gens = Json::array();
  for (double b : result.best_by_generation) gens.push_back(round_sig(b));
  j["best_by_generation"] = gens;
  Json history = Json::array();
  for (const auto& e : result.history)
    history.push_back({{"generation", e.generation},
                       {"slot", e.slot},
                       {"k", static_cast<int>(e.candidate.k)},
                       {"alpha", round_sig(e.candidate.alpha)},
                       {"beta", round_sig(e.candidate.beta)},
                       {"fitness", round_sig(e.candidate.fitness.value_or(0.0))},
                       {"lda_fits", e.lda_fits}});
  j["history"] = history;
  if (result.final_report) {
    Json scores = Json::object();
    for (const auto& p : result.final_report->curve)
      scores[std::to_string(p.n)] = round_sig(p.raw_score);
    j["final_raw_scores"] = scores;
    j["final_repeats"] = result.final_report->config.repeats_j;
  }
  return dump_json(j);
}

}  // namespace ldade
