#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "ldade/classify.hpp"
#include "ldade/corpus.hpp"
#include "ldade/error.hpp"
#include "ldade/io.hpp"
#include "ldade/json_util.hpp"
#include "ldade/rng.hpp"
#include "ldade/stability.hpp"
#include "ldade/stats.hpp"
#include "ldade/tuner.hpp"

namespace ldade::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = LDADE_VERSION;

// Keys a config file may set, by section. Each key is the long flag name.
const std::map<std::string, std::set<std::string>>& config_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"corpus", {"input", "format", "stopwords", "keep-fraction", "no-stemming"}},
      {"lda", {"k", "alpha", "beta", "iterations"}},
      {"stability", {"n-words", "runs", "repeats", "inner-repeats"}},
      {"de",
       {"np", "f", "cr", "generations", "budget", "baseline", "k-min", "k-max", "alpha-min",
        "alpha-max", "beta-min", "beta-max"}},
      {"classify", {"folds", "fold-in-sweeps", "positive", "trials", "tuned", "tune-inline"}},
      {"stats", {"significance", "a12", "bootstrap"}},
      {"run", {"seed", "jobs", "out"}},
  };
  return keys;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Buffers every output file and writes them together; on failure the files
// already written are removed again.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string body) { files_.emplace_back(name, std::move(body)); }
  void log(const std::string& line) { log_ << line << '\n'; }

  std::size_t commit() {
    add("logs/run.log", log_.str());
    if (fs::exists(dir_) && !fs::is_directory(dir_))
      throw Error("output path is not a directory: " + dir_.string());
    const bool existed = fs::exists(dir_);
    std::vector<fs::path> touched;
    try {
      for (const auto& [name, body] : files_) {
        const auto path = dir_ / name;
        fs::create_directories(path.parent_path());
        touched.push_back(path);
        io::write_file(path, body);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : touched) fs::remove(p, ec);
      fs::remove(dir_ / "logs", ec);  // only succeeds when empty
      if (!existed) fs::remove(dir_, ec);
      throw;
    }
    return files_.size();
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::ostringstream log_;
};

struct RunOptions {
  std::string config;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
};

struct CorpusOptions {
  std::string input;
  std::string format;
  std::string stopwords;
  double keep_fraction = 0.05;
  bool no_stemming = false;
};

struct LdaOptions {
  int k = 10;
  double alpha = 0.0;  // 0 = 1/k
  double beta = 0.0;   // 0 = 1/k
  int iterations = 100;

  LdaCandidate candidate() const {
    return {static_cast<double>(k), alpha > 0.0 ? alpha : 1.0 / k, beta > 0.0 ? beta : 1.0 / k};
  }
};

struct StabilityOptions {
  std::string n_words = "5";
  int runs = 10;
  int repeats = 10;
  int inner_repeats = 1;
};

struct DeOptions {
  int np = 10;
  double f = 0.7;
  double cr = 0.3;
  int generations = 3;
  int budget = 0;
  std::string baseline = "de";
  Bounds bounds;
};

struct ClassifyOptions {
  int folds = 5;
  int fold_in_sweeps = 20;
  std::string positive;
  int trials = 1;
  std::string tuned;
  bool tune_inline = false;
};

struct StatsOptions {
  std::string input;
  double significance = 0.01;
  double a12 = 0.6;
  int bootstrap = 1000;
};

void add_run_options(CLI::App* sub, RunOptions& o, bool needs_out) {
  sub->add_option("--config", o.config, "INI file with [corpus], [lda], [stability], [de], "
                                        "[classify], [stats] and [run] sections");
  sub->add_option("--seed", o.seed, "Base random seed");
  sub->add_option("--jobs", o.jobs, "Concurrent LDA fits")->check(CLI::PositiveNumber);
  auto* out = sub->add_option("--out", o.out, "Output directory");
  if (needs_out) out->required();
}

void add_corpus_options(CLI::App* sub, CorpusOptions& o) {
  sub->add_option("--input", o.input, "Corpus file, or a directory written by `preprocess`")
      ->required();
  sub->add_option("--format", o.format, "lines, csv or matrix (default: from the input path)")
      ->check(CLI::IsMember({"lines", "csv", "matrix"}));
  sub->add_option("--stopwords", o.stopwords, "Stopword list (default: bundled English list)");
  sub->add_option("--keep-fraction", o.keep_fraction, "Share of distinct terms kept by tf-idf");
  sub->add_flag("--no-stemming", o.no_stemming, "Skip Porter stemming");
}

void add_lda_options(CLI::App* sub, LdaOptions& o) {
  sub->add_option("--k", o.k, "Number of topics");
  sub->add_option("--alpha", o.alpha, "Document-topic prior (default 1/k)");
  sub->add_option("--beta", o.beta, "Topic-word prior (default 1/k)");
  sub->add_option("--iterations", o.iterations, "Gibbs sweeps per fit");
}

void add_stability_options(CLI::App* sub, StabilityOptions& o, bool tuning) {
  if (tuning)
    sub->add_option("--n-words", o.n_words, "Target n: a number, a comma list, or `all`");
  sub->add_option("--runs", o.runs, "Shuffled runs per repeat (m)");
  sub->add_option("--repeats", o.repeats, "Repeats (j) of the stability score");
  if (tuning)
    sub->add_option("--inner-repeats", o.inner_repeats, "Repeats per fitness evaluation");
}

void add_de_options(CLI::App* sub, DeOptions& o) {
  sub->add_option("--np", o.np, "DE population size");
  sub->add_option("--f", o.f, "DE differential weight");
  sub->add_option("--cr", o.cr, "DE crossover probability");
  sub->add_option("--generations", o.generations, "DE generations after the initial population");
  sub->add_option("--budget", o.budget,
                  "Fitness evaluations (DE: cap, default np*(1+generations); random: default 30)");
  sub->add_option("--baseline", o.baseline, "Tuner: de or random")
      ->check(CLI::IsMember({"de", "random"}));
  sub->add_option("--k-min", o.bounds.k_min);
  sub->add_option("--k-max", o.bounds.k_max);
  sub->add_option("--alpha-min", o.bounds.alpha_min);
  sub->add_option("--alpha-max", o.bounds.alpha_max);
  sub->add_option("--beta-min", o.bounds.beta_min);
  sub->add_option("--beta-max", o.bounds.beta_max);
}

// Puts `--key=value` pairs from the config file right after the subcommand
// name, so anything given on the command line (parsed later) wins.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty() || args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;
  if (!fs::exists(config)) throw Error("config file not found: " + config);

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(config, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("config " + config + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<std::string> injected;
  for (const auto& [section, body] : tree) {
    const auto known = config_keys().find(section);
    if (known == config_keys().end() || body.empty())
      throw Error("config " + config + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key))
        throw Error("config " + config + ": unknown key '" + key + "' in [" + section + "]");
      if (sub->get_option_no_throw("--" + key) != nullptr)
        injected.push_back("--" + key + "=" + value.data());
    }
  }
  std::vector<std::string> merged{args[0]};
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

struct LoadedInput {
  std::vector<RawDocument> documents;  // empty for a matrix directory
  DocumentTermMatrix matrix;
  std::vector<std::string> dropped_ids;
  std::string input_sha256;
};

std::string resolve_format(const CorpusOptions& o) {
  if (!o.format.empty()) return o.format;
  if (fs::is_directory(o.input)) return "matrix";
  return fs::path(o.input).extension() == ".csv" ? "csv" : "lines";
}

PreprocessConfig preprocess_config(const CorpusOptions& o) {
  PreprocessConfig pc;
  pc.stopwords = o.stopwords.empty() ? default_stopwords() : io::load_stopwords(o.stopwords);
  pc.stemming_enabled = !o.no_stemming;
  pc.keep_fraction = o.keep_fraction;
  pc.validate();
  return pc;
}

std::vector<RawDocument> load_documents(const CorpusOptions& o, std::string& sha) {
  const auto format = resolve_format(o);
  if (format == "matrix") throw Error("this command needs a corpus file, not a matrix directory");
  if (!fs::exists(o.input)) throw Error("input not found: " + o.input);
  sha = sha256_hex(io::read_file(o.input));
  return io::load_corpus(o.input, io::parse_format(format));
}

LoadedInput load_input(const CorpusOptions& o) {
  LoadedInput in;
  const auto format = resolve_format(o);
  if (format == "matrix") {
    if (!fs::exists(o.input)) throw Error("input not found: " + o.input);
    in.matrix = io::import_matrix(o.input);
    std::string all;
    for (const auto& [name, body] : io::matrix_files(in.matrix)) all += name + '\n' + body;
    in.input_sha256 = sha256_hex(all);
    return in;
  }
  in.documents = load_documents(o, in.input_sha256);
  auto built = build_corpus(in.documents, preprocess_config(o));
  in.matrix = std::move(built.matrix);
  in.dropped_ids = std::move(built.dropped_ids);
  return in;
}

Json corpus_settings(const CorpusOptions& o) {
  return {{"input", o.input},
          {"format", resolve_format(o)},
          {"stopwords", o.stopwords.empty() ? std::string("bundled") : o.stopwords},
          {"keep_fraction", round_sig(o.keep_fraction)},
          {"stemming", !o.no_stemming}};
}

Json lda_settings(const LdaOptions& o) {
  const auto c = o.candidate();
  return {{"k", o.k}, {"alpha", round_sig(c.alpha)}, {"beta", round_sig(c.beta)},
          {"iterations", o.iterations}};
}

// Settings exclude --jobs and --out, which do not change results.
Json provenance(const Json& settings, std::uint64_t seed, const std::string& input_sha256) {
  Json p = {{"config_hash", sha256_hex(settings.dump())},
            {"seed", seed},
            {"version", kVersion},
            {"settings", settings}};
  if (!input_sha256.empty()) p["input_sha256"] = input_sha256;
  return p;
}

std::vector<int> parse_targets(const std::string& spec) {
  std::vector<int> out;
  if (spec == "all") {
    for (int n = 1; n <= kMaxTopWords; ++n) out.push_back(n);
    return out;
  }
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("--n-words: '" + item + "' is not a number");
    }
    if (n < 1 || n > kMaxTopWords) throw Error("--n-words values must lie in [1, 9]");
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  if (out.empty()) throw Error("--n-words is empty");
  return out;
}

std::string scores_csv(const std::vector<std::pair<int, double>>& rows, const std::string& column,
                       const std::vector<int>* tuned_for = nullptr) {
  std::ostringstream s;
  s << "n," << column << (tuned_for ? ",tuned_for" : "") << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s << rows[i].first << ',' << format_real(rows[i].second);
    if (tuned_for) s << ',' << (*tuned_for)[i];
    s << '\n';
  }
  return s.str();
}

// ---------------------------------------------------------------- preprocess

int cmd_preprocess(const RunOptions& run, const CorpusOptions& corpus, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (resolve_format(corpus) == "matrix")
    throw Error("preprocess needs a corpus file, not a matrix directory");
  const auto in = load_input(corpus);
  Outputs outputs(run.out);
  outputs.log("started " + utc_now());
  for (const auto& [name, body] : io::matrix_files(in.matrix)) outputs.add(name, body);

  std::string dropped;
  for (const auto& id : in.dropped_ids) dropped += id + '\n';
  outputs.add("dropped.txt", dropped);

  const auto& v = *in.matrix.vocabulary;
  Json report = {{"documents", in.matrix.num_docs()},
                 {"dropped", in.dropped_ids.size()},
                 {"terms", in.matrix.num_terms()},
                 {"distinct_terms", v.distinct_terms},
                 {"tokens", in.matrix.total_tokens()},
                 {"labeled", in.matrix.has_labels()},
                 {"provenance", provenance({{"corpus", corpus_settings(corpus)}}, run.seed,
                                           in.input_sha256)}};
  outputs.add("preprocess.json", dump_json(report));
  outputs.log("finished " + utc_now() + " elapsed_s=" + format_real(seconds_since(start)));
  const auto files = outputs.commit();
  out << "preprocess: " << in.matrix.num_docs() << " documents, " << in.matrix.num_terms()
      << " terms, " << in.dropped_ids.size() << " dropped; " << files << " files in " << run.out
      << '\n';
  return 0;
}

// ---------------------------------------------------------------- stability

int cmd_stability(const RunOptions& run, const CorpusOptions& corpus, const LdaOptions& lda,
                  const StabilityOptions& st, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto in = load_input(corpus);
  StabilityConfig cfg;
  cfg.runs_m = st.runs;
  cfg.repeats_j = st.repeats;
  cfg.base_seed = run.seed;
  cfg.jobs = run.jobs;
  const auto report = stability_curve(lda.candidate(), in.matrix, cfg, lda.iterations);

  Outputs outputs(run.out);
  outputs.log("started " + utc_now());
  Json j = Json::parse(stability_report_json(report));
  const Json settings = {{"corpus", corpus_settings(corpus)},
                         {"lda", lda_settings(lda)},
                         {"stability", {{"runs", st.runs}, {"repeats", st.repeats}}}};
  j["provenance"] = provenance(settings, run.seed, in.input_sha256);
  outputs.add("stability.json", dump_json(j));
  outputs.add("stability.csv", stability_report_csv(report));
  outputs.log("finished " + utc_now() + " elapsed_s=" + format_real(seconds_since(start)) +
              " lda_fits=" + std::to_string(report.lda_fits));
  outputs.commit();
  out << "stability: k=" << report.k << " raw scores";
  for (const auto& p : report.curve) out << ' ' << p.n << ':' << format_real(p.raw_score);
  out << '\n';
  return 0;
}

// ---------------------------------------------------------------- tune

struct TuneOutcome {
  std::vector<int> targets;
  std::vector<TuningResult> results;
};

TuningProblem make_problem(const DocumentTermMatrix& matrix, int n, const StabilityOptions& st,
                           const DeOptions& de, const LdaOptions& lda, const RunOptions& run) {
  TuningProblem problem;
  problem.matrix = &matrix;
  problem.n = n;
  problem.bounds = de.bounds;
  problem.stability.runs_m = st.runs;
  problem.stability.repeats_j = st.repeats;
  problem.stability.n_words = n;
  problem.stability.jobs = run.jobs;
  problem.lda_iterations = lda.iterations;
  return problem;
}

Json de_settings(const DeOptions& de, const StabilityOptions& st) {
  return {{"baseline", de.baseline},
          {"np", de.np},
          {"f", round_sig(de.f)},
          {"cr", round_sig(de.cr)},
          {"generations", de.generations},
          {"budget", de.budget},
          {"inner_repeats", st.inner_repeats},
          {"final_repeats", st.repeats},
          {"bounds",
           {{"k", {de.bounds.k_min, de.bounds.k_max}},
            {"alpha", {round_sig(de.bounds.alpha_min), round_sig(de.bounds.alpha_max)}},
            {"beta", {round_sig(de.bounds.beta_min), round_sig(de.bounds.beta_max)}}}}};
}

// Tunes once per target n; the seed for target n depends only on (seed, n).
TuneOutcome run_tuning(const DocumentTermMatrix& matrix, const std::vector<int>& targets,
                       const StabilityOptions& st, const DeOptions& de, const LdaOptions& lda,
                       const RunOptions& run, std::string* log_lines) {
  TuneOutcome outcome;
  outcome.targets = targets;
  for (int n : targets) {
    const auto problem = make_problem(matrix, n, st, de, lda, run);
    const auto seed = derive_seed(run.seed, {1, static_cast<std::uint64_t>(n)});
    EvaluationObserver observer;
    if (log_lines)
      observer = [&, n](const Evaluation& e) {
        auto line = Json::parse(evaluation_log_line(e));
        line["n"] = n;
        *log_lines += line.dump() + '\n';
      };
    if (de.baseline == "random") {
      const int budget = de.budget > 0 ? de.budget : 30;
      outcome.results.push_back(
          random_search(problem, budget, st.inner_repeats, st.repeats, seed, observer));
    } else {
      DeConfig cfg;
      cfg.np = de.np;
      cfg.f = de.f;
      cfg.cr = de.cr;
      cfg.generations = de.generations;
      cfg.inner_repeats = st.inner_repeats;
      cfg.final_repeats = st.repeats;
      cfg.max_evaluations = de.budget;
      outcome.results.push_back(tune_de(problem, cfg, seed, observer));
    }
  }
  return outcome;
}

int cmd_tune(const RunOptions& run, const CorpusOptions& corpus, const LdaOptions& lda,
             const StabilityOptions& st, const DeOptions& de, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto targets = parse_targets(st.n_words);
  if (st.repeats < 1) throw Error("--repeats must be >= 1");
  const auto in = load_input(corpus);
  Outputs outputs(run.out);
  outputs.log("started " + utc_now());

  StabilityConfig before_cfg;
  before_cfg.runs_m = st.runs;
  before_cfg.repeats_j = st.repeats;
  before_cfg.base_seed = derive_seed(run.seed, {0});
  before_cfg.jobs = run.jobs;
  const auto before_start = std::chrono::steady_clock::now();
  const auto before = stability_curve(lda.candidate(), in.matrix, before_cfg, lda.iterations);
  const double before_s = seconds_since(before_start);

  std::string log_lines;
  const auto tuning_start = std::chrono::steady_clock::now();
  const auto outcome = run_tuning(in.matrix, targets, st, de, lda, run, &log_lines);
  const double tuning_s = seconds_since(tuning_start);

  // after[n] comes from the run tuned for n, or from the first target's run
  // when n was not a target.
  std::vector<std::pair<int, double>> before_rows, after_rows, delta_rows;
  std::vector<int> tuned_for;
  Json before_j = Json::object(), after_j = Json::object(), delta_j = Json::object();
  for (const auto& point : before.curve) {
    const int n = point.n;
    auto it = std::find(targets.begin(), targets.end(), n);
    const std::size_t idx = it == targets.end() ? 0 : static_cast<std::size_t>(it - targets.begin());
    const double after = outcome.results[idx].final_report->score(n);
    before_rows.emplace_back(n, point.raw_score);
    after_rows.emplace_back(n, after);
    delta_rows.emplace_back(n, after - point.raw_score);
    tuned_for.push_back(targets[idx]);
    const auto key = std::to_string(n);
    before_j[key] = round_sig(point.raw_score);
    after_j[key] = round_sig(after);
    delta_j[key] = round_sig(after - point.raw_score);
  }

  Json targets_j = Json::array();
  long long tuned_fits = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Json t = Json::parse(tuning_result_json(outcome.results[i]));
    t["n"] = targets[i];
    targets_j.push_back(t);
    tuned_fits += outcome.results[i].lda_fit_count;
  }
  const Json settings = {{"corpus", corpus_settings(corpus)},
                         {"lda", lda_settings(lda)},
                         {"stability",
                          {{"runs", st.runs}, {"repeats", st.repeats}, {"n_words", targets}}},
                         {"tuner", de_settings(de, st)}};
  Json report = {{"untuned", lda_settings(lda)},
                 {"before", before_j},
                 {"after", after_j},
                 {"delta", delta_j},
                 {"targets", targets_j},
                 {"untuned_lda_fits", before.lda_fits},
                 {"tuned_lda_fits", tuned_fits},
                 {"provenance", provenance(settings, run.seed, in.input_sha256)}};
  outputs.add("tuning.json", dump_json(report));
  outputs.add("before.csv", scores_csv(before_rows, "raw_score"));
  outputs.add("after.csv", scores_csv(after_rows, "raw_score", &tuned_for));
  outputs.add("delta.csv", scores_csv(delta_rows, "delta", &tuned_for));
  outputs.add("logs/tuning_log.jsonl", log_lines);
  outputs.log("untuned_elapsed_s=" + format_real(before_s) +
              " untuned_lda_fits=" + std::to_string(before.lda_fits));
  outputs.log("tuned_elapsed_s=" + format_real(tuning_s) +
              " tuned_lda_fits=" + std::to_string(tuned_fits));
  outputs.log("finished " + utc_now() + " elapsed_s=" + format_real(seconds_since(start)));
  outputs.commit();

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& best = outcome.results[i].best;
    out << "tune n=" << targets[i] << ": k=" << static_cast<int>(best.k)
        << " alpha=" << format_real(best.alpha) << " beta=" << format_real(best.beta)
        << " before=" << format_real(before.score(targets[i]))
        << " after=" << format_real(outcome.results[i].final_report->score(targets[i])) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- classify

LdaCandidate tuned_from_file(const std::string& path, const std::string& n_words) {
  if (!fs::exists(path)) throw Error("tuning report not found: " + path);
  Json j;
  try {
    j = Json::parse(io::read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
  if (!j.contains("targets") || j["targets"].empty())
    throw Error(path + ": not a tuning report (no targets)");
  const auto wanted = parse_targets(n_words).front();
  const Json* pick = &j["targets"][0];
  for (const auto& t : j["targets"])
    if (t.value("n", 0) == wanted) pick = &t;
  const auto& best = (*pick)["best"];
  return {best.at("k").get<double>(), best.at("alpha").get<double>(), best.at("beta").get<double>()};
}

Json metrics_brief(const Metrics& m) {
  return {{"precision", round_sig(m.precision)},
          {"recall", round_sig(m.recall)},
          {"f1", round_sig(m.f1)},
          {"f2", round_sig(m.f2)}};
}

std::string trials_csv(const std::vector<Metrics>& untuned, const std::vector<Metrics>& tuned,
                       double Metrics::*field) {
  std::ostringstream s;
  s << "group,value\n";
  for (const auto& m : untuned) s << "untuned," << format_real(m.*field) << '\n';
  for (const auto& m : tuned) s << "tuned," << format_real(m.*field) << '\n';
  return s.str();
}

Json ranking_json(const std::vector<RankedGroup>& ranked) {
  Json out = Json::array();
  for (const auto& g : ranked)
    out.push_back({{"group", g.name},
                   {"rank", g.rank},
                   {"median", round_sig(g.median)},
                   {"mean", round_sig(g.mean)},
                   {"n", g.size}});
  return out;
}

int cmd_classify(const RunOptions& run, const CorpusOptions& corpus, const LdaOptions& lda,
                 const StabilityOptions& st, const DeOptions& de, const ClassifyOptions& co,
                 std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (co.tuned.empty() == !co.tune_inline)
    throw Error("classify needs exactly one of --tuned FILE or --tune-inline");
  if (co.trials < 1) throw Error("--trials must be >= 1");
  std::string sha;
  const auto documents = load_documents(corpus, sha);
  const auto pre = preprocess_config(corpus);

  Outputs outputs(run.out);
  outputs.log("started " + utc_now());
  LdaCandidate tuned;
  Json tuning_source;
  if (co.tune_inline) {
    const auto built = build_corpus(documents, pre);
    std::string log_lines;
    const auto target = parse_targets(st.n_words).front();
    const auto outcome = run_tuning(built.matrix, {target}, st, de, lda, run, &log_lines);
    tuned = outcome.results[0].best.params();
    tuning_source = {{"inline", Json::parse(tuning_result_json(outcome.results[0]))}};
    outputs.add("logs/tuning_log.jsonl", log_lines);
  } else {
    tuned = tuned_from_file(co.tuned, st.n_words);
    tuning_source = {{"file", co.tuned}};
  }

  PipelineConfig base;
  base.preprocess = pre;
  base.lda.iterations = lda.iterations;
  base.folds = co.folds;
  base.fold_in_sweeps = co.fold_in_sweeps;
  if (!co.positive.empty()) base.positive_label = co.positive;
  base.jobs = run.jobs;
  const auto untuned_params = lda.candidate();
  auto with = [&](const LdaCandidate& c) {
    PipelineConfig p = base;
    p.lda.k = trim_topic_count(c.k);
    p.lda.alpha = c.alpha;
    p.lda.beta = c.beta;
    return p;
  };
  const auto untuned_cfg = with(untuned_params);
  const auto tuned_cfg = with(tuned);

  std::vector<Metrics> untuned_m, tuned_m;
  for (int t = 0; t < co.trials; ++t) {
    const auto seed = derive_seed(run.seed, {2, static_cast<std::uint64_t>(t)});
    untuned_m.push_back(evaluate_pipeline(documents, untuned_cfg, seed));
    tuned_m.push_back(evaluate_pipeline(documents, tuned_cfg, seed));
  }

  Json report;
  report["untuned"] = Json::parse(metrics_json(untuned_m[0]));
  report["untuned"]["params"] = {{"k", untuned_cfg.lda.k},
                                 {"alpha", round_sig(untuned_cfg.lda.alpha)},
                                 {"beta", round_sig(untuned_cfg.lda.beta)}};
  report["tuned"] = Json::parse(metrics_json(tuned_m[0]));
  report["tuned"]["params"] = {{"k", tuned_cfg.lda.k},
                               {"alpha", round_sig(tuned_cfg.lda.alpha)},
                               {"beta", round_sig(tuned_cfg.lda.beta)}};
  report["tuning"] = tuning_source;
  if (co.trials > 1) {
    Json trials = Json::array();
    for (int t = 0; t < co.trials; ++t)
      trials.push_back({{"trial", t},
                        {"untuned", metrics_brief(untuned_m[t])},
                        {"tuned", metrics_brief(tuned_m[t])}});
    report["trials"] = trials;
    for (auto [name, field] : {std::pair{"f1", &Metrics::f1}, std::pair{"f2", &Metrics::f2}}) {
      const auto csv = trials_csv(untuned_m, tuned_m, field);
      outputs.add(std::string("trials_") + name + ".csv", csv);
      const auto groups = parse_groups_csv(csv);
      report[std::string("scott_knott_") + name] =
          ranking_json(scott_knott(groups, StatsConfig{}, derive_seed(run.seed, {3})));
    }
  }
  const Json settings = {{"corpus", corpus_settings(corpus)},
                         {"lda", lda_settings(lda)},
                         {"classify",
                          {{"folds", co.folds},
                           {"fold_in_sweeps", co.fold_in_sweeps},
                           {"positive", co.positive},
                           {"trials", co.trials},
                           {"tuned", co.tuned},
                           {"tune_inline", co.tune_inline}}},
                         {"tuner", co.tune_inline ? de_settings(de, st) : Json()}};
  report["provenance"] = provenance(settings, run.seed, sha);
  outputs.add("classify.json", dump_json(report));
  outputs.log("finished " + utc_now() + " elapsed_s=" + format_real(seconds_since(start)));
  outputs.commit();
  out << "classify: untuned f1=" << format_real(untuned_m[0].f1)
      << " f2=" << format_real(untuned_m[0].f2) << "; tuned f1=" << format_real(tuned_m[0].f1)
      << " f2=" << format_real(tuned_m[0].f2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const RunOptions& run, const StatsOptions& so, std::ostream& out) {
  if (!fs::exists(so.input)) throw Error("input not found: " + so.input);
  const auto body = io::read_file(so.input);
  const auto groups = parse_groups_csv(body);
  StatsConfig cfg;
  cfg.significance = so.significance;
  cfg.a12_threshold = so.a12;
  cfg.bootstrap_samples = so.bootstrap;
  const auto ranked = scott_knott(groups, cfg, run.seed);

  out << std::left << std::setw(6) << "rank" << std::setw(24) << "group" << std::setw(8) << "n"
      << std::setw(16) << "median"
      << "mean\n";
  for (const auto& g : ranked)
    out << std::left << std::setw(6) << g.rank << std::setw(24) << g.name << std::setw(8)
        << g.size << std::setw(16) << format_real(g.median) << format_real(g.mean) << '\n';

  if (!run.out.empty()) {
    Outputs outputs(run.out);
    outputs.log("started " + utc_now());
    outputs.add("ranks.csv", ranked_groups_csv(ranked));
    const Json settings = {{"input", so.input},
                           {"significance", round_sig(so.significance)},
                           {"a12", round_sig(so.a12)},
                           {"bootstrap", so.bootstrap}};
    Json report = {{"ranks", ranking_json(ranked)},
                   {"provenance", provenance(settings, run.seed, sha256_hex(body))}};
    outputs.add("stats.json", dump_json(report));
    outputs.log("finished " + utc_now());
    outputs.commit();
  }
  return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const RunOptions& run, const std::vector<std::string>& inputs, std::ostream& out) {
  std::ostringstream curves, metrics;
  curves << "source,series,n,value\n";
  metrics << "source,pipeline,precision,recall,f1,f2\n";
  Json combined = Json::object();
  std::set<std::string> seen;
  std::string all_bodies;
  for (const auto& path : inputs) {
    if (!fs::exists(path)) throw Error("input not found: " + path);
    const auto body = io::read_file(path);
    all_bodies += body;
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw Error(path + ": " + e.what());
    }
    // Reports sit in their own output directory, so the directory names the source.
    const fs::path p(path);
    std::string source = p.parent_path().filename().string();
    if (source.empty()) source = p.stem().string();
    for (int copy = 2; !seen.insert(source).second; ++copy)
      source = p.parent_path().filename().string() + "#" + std::to_string(copy);

    Json series = Json::object();
    if (j.contains("raw_scores")) series["stability"] = j["raw_scores"];
    for (const char* key : {"before", "after", "delta"})
      if (j.contains(key) && j[key].is_object()) series[key] = j[key];
    for (const char* key : {"untuned", "tuned"})
      if (j.contains(key) && j[key].contains("f1")) {
        const auto& m = j[key];
        metrics << io::csv_escape(source) << ',' << key << ','
                << format_real(m.at("precision").get<double>()) << ','
                << format_real(m.at("recall").get<double>()) << ','
                << format_real(m.at("f1").get<double>()) << ','
                << format_real(m.at("f2").get<double>()) << '\n';
        series[std::string("metrics_") + key] = {
            {"precision", m.at("precision")}, {"recall", m.at("recall")},
            {"f1", m.at("f1")}, {"f2", m.at("f2")}};
      }
    if (series.empty()) throw Error(path + ": not a stability, tuning or classify report");
    for (const auto& [name, values] : series.items()) {
      if (name.rfind("metrics_", 0) == 0) continue;
      std::vector<std::pair<int, double>> rows;
      for (const auto& [n, v] : values.items()) rows.emplace_back(std::stoi(n), v.get<double>());
      std::sort(rows.begin(), rows.end());
      for (const auto& [n, v] : rows)
        curves << io::csv_escape(source) << ',' << name << ',' << n << ',' << format_real(v) << '\n';
    }
    combined[source] = series;
  }

  Outputs outputs(run.out);
  outputs.log("started " + utc_now());
  outputs.add("curves.csv", curves.str());
  outputs.add("metrics.csv", metrics.str());
  Json report = {{"sources", combined},
                 {"provenance", provenance({{"inputs", inputs}}, run.seed, sha256_hex(all_bodies))}};
  outputs.add("report.json", dump_json(report));
  outputs.log("finished " + utc_now());
  outputs.commit();
  out << "report: " << inputs.size() << " reports aggregated into " << run.out << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LDA topic stability scoring and differential-evolution tuning", "ldade"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();

  RunOptions run_opts;
  CorpusOptions corpus;
  LdaOptions lda;
  StabilityOptions st;
  DeOptions de;
  ClassifyOptions co;
  StatsOptions so;
  std::vector<std::string> report_inputs;

  auto* pre = app.add_subcommand("preprocess", "Build the document-term matrix");
  add_corpus_options(pre, corpus);
  add_run_options(pre, run_opts, true);

  auto* stab = app.add_subcommand("stability", "Raw stability score curve for fixed parameters");
  add_corpus_options(stab, corpus);
  add_lda_options(stab, lda);
  add_stability_options(stab, st, false);
  add_run_options(stab, run_opts, true);

  auto* tune = app.add_subcommand("tune", "Tune k, alpha, beta for stability");
  add_corpus_options(tune, corpus);
  add_lda_options(tune, lda);
  add_stability_options(tune, st, true);
  add_de_options(tune, de);
  add_run_options(tune, run_opts, true);

  auto* cls = app.add_subcommand("classify", "Cross-validated classification, untuned vs tuned");
  add_corpus_options(cls, corpus);
  add_lda_options(cls, lda);
  add_stability_options(cls, st, true);
  add_de_options(cls, de);
  cls->add_option("--folds", co.folds, "Cross-validation folds");
  cls->add_option("--fold-in-sweeps", co.fold_in_sweeps, "Gibbs sweeps for unseen documents");
  cls->add_option("--positive", co.positive, "Positive class (default: last label)");
  cls->add_option("--trials", co.trials, "Repeat both pipelines under this many seeds");
  cls->add_option("--tuned", co.tuned, "tuning.json written by `tune`");
  cls->add_flag("--tune-inline", co.tune_inline, "Tune on the corpus before classifying");
  add_run_options(cls, run_opts, true);

  auto* stats = app.add_subcommand("stats", "Scott-Knott ranking of `group,value` samples");
  stats->add_option("--input", so.input, "CSV with group,value rows")->required();
  stats->add_option("--significance", so.significance, "Bootstrap significance level");
  stats->add_option("--a12", so.a12, "Smallest A12 that counts as a real difference");
  stats->add_option("--bootstrap", so.bootstrap, "Bootstrap resamples");
  add_run_options(stats, run_opts, false);

  auto* rep = app.add_subcommand("report", "Aggregate report JSON files into plot-ready tables");
  rep->add_option("--input", report_inputs, "stability.json, tuning.json or classify.json files")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_run_options(rep, run_opts, true);

  try {
    auto merged = merge_config(args, app);
    std::reverse(merged.begin(), merged.end());
    app.parse(merged);
  } catch (const CLI::ParseError& e) {
    // --help and --version arrive here too, with exit code 0.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*pre) return cmd_preprocess(run_opts, corpus, out);
    if (*stab) return cmd_stability(run_opts, corpus, lda, st, out);
    if (*tune) return cmd_tune(run_opts, corpus, lda, st, de, out);
    if (*cls) return cmd_classify(run_opts, corpus, lda, st, de, co, out);
    if (*stats) return cmd_stats(run_opts, so, out);
    if (*rep) return cmd_report(run_opts, report_inputs, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ldade::cli
