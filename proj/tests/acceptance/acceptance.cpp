// Acceptance suite: one check per criterion, one PASS/FAIL line each.
// Usage: ldade_acceptance [--criterion N]   (default: all)

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "helpers.hpp"
#include "ldade/classify.hpp"
#include "ldade/error.hpp"
#include "ldade/io.hpp"
#include "ldade/json_util.hpp"
#include "ldade/stability.hpp"
#include "ldade/stats.hpp"
#include "ldade/synthetic.hpp"
#include "ldade/tuner.hpp"

namespace fs = std::filesystem;
using namespace ldade;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_real(round_sig(v, 4)); }

std::string join(const std::vector<double>& values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : " ") + fmt(v);
  return s;
}

const DocumentTermMatrix& bundled() {
  static const auto matrix = test::bundled_matrix();
  return matrix;
}

// Two planted topics blurred by shared background words and off-topic tokens.
PlantedCorpus noisy_planted(std::uint64_t seed) {
  PlantedConfig pc;
  pc.num_docs = 200;
  pc.num_topics = 2;
  pc.background_words = 20;
  pc.background_share = 0.2;
  pc.off_topic_share = 0.2;
  pc.seed = seed;
  return make_planted_corpus(pc);
}

Bounds planted_bounds() {
  Bounds b;
  b.k_min = 2;
  b.k_max = 10;
  return b;
}

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << "ldade " << args.front() << " failed: " << err.str();
  return code;
}

std::map<std::string, std::string> report_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel.rfind("logs/", 0) != 0) files[rel] = io::read_file(entry.path());
  }
  return files;
}

// ------------------------------------------------------------------ 1

Outcome overlap_worked_example() {
  const auto start = Clock::now();
  auto topic = [](const std::string& p) {
    std::vector<std::string> t;
    for (int i = 0; i < 5; ++i) t.push_back(p + std::to_string(i));
    return t;
  };
  auto near = [](std::vector<std::string> t, const std::string& w) {
    t.back() = w;
    return t;
  };
  const auto a = topic("a"), b = topic("b"), c = topic("c"), d = topic("d");
  const std::vector<TopicSnapshot> runs = {
      {0, {a, b, c, d}},
      {1, {d, near(c, "x1"), b, a}},
      {2, {near(a, "x2"), b, d, near(c, "x3")}},
      {3, {near(b, "x4"), near(a, "x5"), topic("y"), d}},
  };
  const auto res = overlap(runs, 5, 4);
  const double elapsed = seconds_since(start);
  const bool exact = res.per_topic_fraction == std::vector<double>{0.5, 0.75, 0.25, 1.0} &&
                     res.overlap_score == 0.625;
  return {exact && elapsed < 1.0, "fractions (" + join(res.per_topic_fraction) + "), median " +
                                       fmt(res.overlap_score) + ", " + fmt(elapsed) + " s"};
}

// ------------------------------------------------------------------ 2

Outcome metric_examples() {
  const auto start = Clock::now();
  std::vector<std::string> failures;
  auto expect = [&](const std::string& name, double got, double want) {
    if (std::abs(got - want) > 1e-9) failures.push_back(name + "=" + fmt(got));
  };
  expect("fbeta(0.7,0.7,1)", fbeta(0.7, 0.7, 1.0), 0.7);
  expect("fbeta(0.7,0.7,2)", fbeta(0.7, 0.7, 2.0), 0.7);
  expect("fbeta(1,0,1)", fbeta(1.0, 0.0, 1.0), 0.0);
  expect("fbeta(0.6,0.9,2)", fbeta(0.6, 0.9, 2.0), 2.7 / 3.3);
  const std::vector<double> one = {1.0};
  expect("a12(same)", a12(one, one), 0.5);
  expect("a12(greater)", a12(std::vector<double>{5, 6}, std::vector<double>{1, 2}), 1.0);
  expect("a12((1,2),(1,3))", a12(std::vector<double>{1, 2}, std::vector<double>{1, 3}), 0.375);

  auto cand = [](double k, double alpha, double beta) {
    Candidate c;
    c.k = k;
    c.alpha = alpha;
    c.beta = beta;
    return c;
  };
  const Candidate old = cand(50, 0.1, 0.9);
  const std::vector<Candidate> pop = {old, cand(20, 0.5, 0.5), cand(30, 0.8, 0.2),
                                      cand(10, 0.4, 0.6)};
  // The draw decides which donor plays a, b and c; look at every ordering.
  bool hand_example = false, f_zero = true, cr_zero = true;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Rng rng(seed);
    const auto out = extrapolate(old, 0, pop, 1.0, 0.7, Bounds{}, rng);
    if (out.k == 34 && std::abs(out.alpha - 0.78) < 1e-9 && std::abs(out.beta - 0.22) < 1e-9)
      hand_example = true;
    Rng rng_f(seed);
    const auto donor = extrapolate(old, 0, pop, 1.0, 0.0, Bounds{}, rng_f);
    f_zero = f_zero && std::any_of(pop.begin() + 1, pop.end(), [&](const Candidate& p) {
               return p.k == donor.k && p.alpha == donor.alpha && p.beta == donor.beta;
             });
    Rng rng_cr(seed);
    const auto kept = extrapolate(old, 0, pop, 0.0, 0.7, Bounds{}, rng_cr);
    cr_zero = cr_zero && kept.k == old.k && kept.alpha == old.alpha && kept.beta == old.beta;
  }
  if (!hand_example) failures.push_back("extrapolate hand example");
  if (!f_zero) failures.push_back("extrapolate f=0");
  if (!cr_zero) failures.push_back("extrapolate cr=0");

  const double elapsed = seconds_since(start);
  std::string detail = failures.empty() ? "fbeta, a12, extrapolate examples within 1e-9"
                                        : "mismatches:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty() && elapsed < 1.0, detail + ", " + fmt(elapsed) + " s"};
}

// ------------------------------------------------------------------ 3

Outcome instability_reproduction() {
  const auto start = Clock::now();
  int hits = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    StabilityConfig cfg;
    cfg.base_seed = seed;
    const auto report = stability_curve({10, 0.1, 0.1}, bundled(), cfg, 100);
    const double r1 = report.score(1), r9 = report.score(9);
    hits += r1 >= r9 && r9 <= 0.5;
    per_seed += " " + fmt(r1) + "/" + fmt(r9);
  }
  const double elapsed = seconds_since(start);
  return {hits >= 8 && elapsed < 600.0,
          std::to_string(hits) + "/10 seeds with R1 >= R9 and R9 <= 0.5 (R1/R9:" + per_seed +
              "), " + fmt(elapsed) + " s"};
}

// ------------------------------------------------------------------ 4

Outcome tuning_never_hurts() {
  const auto start = Clock::now();
  const auto root = test::scratch_dir("acceptance_4");
  const auto input = (fs::path(LDADE_DATA_DIR) / "se_issues.csv").string();
  std::map<int, std::vector<double>> deltas;
  for (int seed = 0; seed < 10; ++seed) {
    const auto out = root / ("seed" + std::to_string(seed));
    if (run_cli({"tune", "--input", input, "--n-words", "all", "--seed", std::to_string(seed),
                 "--out", out.string()}) != 0)
      return {false, "tune failed for seed " + std::to_string(seed)};
    const auto rows = io::parse_csv(io::read_file(out / "delta.csv"));
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r].size() >= 2) deltas[std::stoi(rows[r][0])].push_back(std::stod(rows[r][1]));
  }
  bool pass = deltas.size() == 9;
  std::vector<double> medians;
  for (auto& [n, values] : deltas) {
    medians.push_back(median(values));
    pass = pass && values.size() == 10 && medians.back() >= 0.0;
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 7200.0, "median delta for n=1..9: " + join(medians) + ", " +
                                        fmt(elapsed) + " s"};
}

// ------------------------------------------------------------------ 5

Outcome budget_runtime_ratio() {
  TuningProblem problem;
  problem.matrix = &bundled();
  problem.n = 5;
  StabilityConfig untuned_cfg;
  untuned_cfg.base_seed = 1;

  const auto untuned_start = Clock::now();
  const auto untuned = stability_curve({10, 0.1, 0.1}, bundled(), untuned_cfg, 100);
  const double untuned_s = seconds_since(untuned_start);

  const auto tuned = tune_de(problem, DeConfig{}, 1);
  const double tuned_s = tuned.elapsed.count();
  const double ratio = tuned_s / untuned_s;
  const bool accounting = tuned.evaluations == 40 && tuned.lda_fit_count == 400 + 100 &&
                          untuned.lda_fits == 100;
  return {accounting && ratio >= 2.0 && ratio <= 8.0,
          "fits " + std::to_string(tuned.lda_fit_count) + " vs " +
              std::to_string(untuned.lda_fits) + ", wall clock " + fmt(tuned_s) + " s vs " +
              fmt(untuned_s) + " s, ratio " + fmt(ratio)};
}

// ------------------------------------------------------------------ 6

Outcome de_versus_random() {
  std::vector<double> de_scores, random_scores;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto planted = noisy_planted(100 + seed);
    TuningProblem problem;
    problem.matrix = &planted.matrix;
    problem.n = 5;
    problem.bounds = planted_bounds();
    const auto de = tune_de(problem, DeConfig{}, seed);
    const auto rnd = random_search(problem, de.evaluations, 1, 10, seed);
    de_scores.push_back(de.final_report->score(5));
    random_scores.push_back(rnd.final_report->score(5));
  }
  const double de_median = median(de_scores), random_median = median(random_scores);
  return {de_median >= random_median,
          "median R5 over 10 seeds at 40 evaluations: DE " + fmt(de_median) + " (" +
              join(de_scores) + "), random " + fmt(random_median) + " (" + join(random_scores) +
              ")"};
}

// ------------------------------------------------------------------ 7

Outcome budget_trend() {
  const std::vector<int> budgets = {10, 20, 30, 50};
  std::vector<double> medians;
  std::string per_budget;
  for (int budget : budgets) {
    std::vector<double> best;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TuningProblem problem;
      problem.matrix = &bundled();
      problem.n = 5;
      DeConfig de;
      de.generations = 4;
      de.max_evaluations = budget;
      de.final_repeats = 0;
      best.push_back(tune_de(problem, de, seed).best_score);
    }
    medians.push_back(median(best));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i)
    monotone = monotone && medians[i] >= medians[i - 1];
  return {monotone, "median best R5 at budgets 10/20/30/50: " + join(medians)};
}

// ------------------------------------------------------------------ 8

Outcome planted_recovery() {
  int recovered = 0;
  int fits = 0;
  bool normalized = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PlantedConfig pc;
    pc.seed = seed;
    const auto planted = make_planted_corpus(pc);
    LdaParams params;
    params.k = 2;
    params.seed = seed;
    const auto model = fit_gibbs(planted.matrix, params);
    ++fits;
    try {
      check_model_invariants(model, 1e-9);
    } catch (const Error&) {
      normalized = false;
    }
    std::set<std::set<std::string>> found, truth;
    for (std::size_t t = 0; t < 2; ++t) {
      const auto top = top_words(model, t, 5);
      found.insert(test::as_set(top));
      const auto& words = planted.planted_topics[t];
      truth.insert(test::as_set({words.begin(), words.begin() + 5}));
    }
    recovered += found == truth;
  }
  // fit_gibbs verifies the same normalization on every fit it returns, so the
  // other criteria would abort on a violation.
  return {recovered >= 9 && normalized,
          std::to_string(recovered) + "/10 seeds recovered both top-5 sets; phi/theta rows sum to 1 "
          "within 1e-9 on " + std::to_string(fits) + " checked fits"};
}

// ------------------------------------------------------------------ 9

Outcome classification_trend() {
  const auto planted = noisy_planted(7);
  TuningProblem problem;
  problem.matrix = &planted.matrix;
  problem.n = 5;
  problem.bounds = planted_bounds();
  const auto tuned = tune_de(problem, DeConfig{}, 9);

  PipelineConfig base;
  base.preprocess.keep_fraction = 1.0;
  PipelineConfig untuned_cfg = base;  // k = 10, alpha = beta = 0.1
  PipelineConfig tuned_cfg = base;
  tuned_cfg.lda.k = trim_topic_count(tuned.best.k);
  tuned_cfg.lda.alpha = tuned.best.alpha;
  tuned_cfg.lda.beta = tuned.best.beta;

  SampleGroup untuned_f1{"untuned", {}}, tuned_f1{"tuned", {}};
  SampleGroup untuned_f2{"untuned", {}}, tuned_f2{"tuned", {}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto u = evaluate_pipeline(planted.documents, untuned_cfg, seed);
    const auto t = evaluate_pipeline(planted.documents, tuned_cfg, seed);
    untuned_f1.values.push_back(u.f1);
    untuned_f2.values.push_back(u.f2);
    tuned_f1.values.push_back(t.f1);
    tuned_f2.values.push_back(t.f2);
  }
  auto ranks_ok = [](const SampleGroup& t, const SampleGroup& u, std::string& note) {
    const auto ranked = scott_knott(std::vector<SampleGroup>{t, u}, StatsConfig{}, 1);
    const bool split = ranked[0].rank != ranked[1].rank;
    note = split ? "tuned rank " + std::to_string(ranked[0].name == "tuned" ? 1 : 2)
                 : "one rank";
    return !split || ranked[0].name == "tuned";
  };
  std::string note1, note2;
  const bool sk = ranks_ok(tuned_f1, untuned_f1, note1) && ranks_ok(tuned_f2, untuned_f2, note2);
  const double tf1 = median(tuned_f1.values), uf1 = median(untuned_f1.values);
  const double tf2 = median(tuned_f2.values), uf2 = median(untuned_f2.values);
  return {tf1 >= uf1 && tf2 >= uf2 && sk,
          "tuned k=" + std::to_string(tuned_cfg.lda.k) + " alpha=" + fmt(tuned_cfg.lda.alpha) +
              " beta=" + fmt(tuned_cfg.lda.beta) + "; median F1 " + fmt(tf1) + " vs " + fmt(uf1) +
              " (" + note1 + "), F2 " + fmt(tf2) + " vs " + fmt(uf2) + " (" + note2 + ")"};
}

// ------------------------------------------------------------------ 10

Outcome cli_determinism() {
  const auto root = test::scratch_dir("acceptance_10");
  const auto input = (fs::path(LDADE_DATA_DIR) / "se_issues.csv").string();
  const std::vector<std::string> lda = {"--iterations", "30", "--runs", "4", "--repeats", "2",
                                        "--seed", "5"};
  // Later commands read the first variant's outputs so that every variant
  // sees identical flags apart from --jobs and --out.
  const auto first = root / "jobs1_a";
  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  std::vector<Command> commands = {
      {"preprocess", {"--input", input, "--seed", "5"}},
      {"stability", {"--input", input}},
      {"tune", {"--input", input, "--np", "4", "--generations", "2", "--n-words", "3,5"}},
      {"classify",
       {"--input", input, "--tuned", (first / "tune" / "tuning.json").string(), "--trials", "3"}},
      {"stats", {"--input", (first / "classify" / "trials_f1.csv").string()}},
      {"report",
       {"--input", (first / "stability" / "stability.json").string(), "--input",
        (first / "tune" / "tuning.json").string(), "--input",
        (first / "classify" / "classify.json").string()}},
  };
  for (const char* name : {"stability", "tune", "classify"})
    for (auto& c : commands)
      if (c.name == name) c.args.insert(c.args.end(), lda.begin(), lda.end());

  std::vector<std::string> mismatched;
  for (const auto& c : commands) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (const auto& [variant, jobs] :
         std::vector<std::pair<std::string, std::string>>{{"jobs1_a", "1"}, {"jobs1_b", "1"},
                                                          {"jobs8", "8"}}) {
      const auto out = root / variant / c.name;
      std::vector<std::string> args = {c.name};
      args.insert(args.end(), c.args.begin(), c.args.end());
      args.insert(args.end(), {"--jobs", jobs, "--out", out.string()});
      if (run_cli(args) != 0) return {false, c.name + " failed"};
      outputs.push_back(report_files(out));
    }
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2])
      mismatched.push_back(c.name);
  }
  std::string detail = mismatched.empty()
                           ? "preprocess, stability, tune, classify, stats, report byte-identical "
                             "across reruns and --jobs 1/8"
                           : "differences in:";
  for (const auto& m : mismatched) detail += " " + m;
  return {mismatched.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {
      overlap_worked_example, metric_examples,  instability_reproduction, tuning_never_hurts,
      budget_runtime_ratio,   de_versus_random, budget_trend,             planted_recovery,
      classification_trend,   cli_determinism};

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (only != 0 && number != only) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << number << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail
              << " | " << fmt(seconds_since(start)) << " s" << std::endl;
  }
  return all ? 0 : 1;
}
