#include "ldade/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ldade/error.hpp"
#include "ldade/io.hpp"
#include "ldade/json_util.hpp"
#include "ldade/rng.hpp"
#include "ldade/stability.hpp"

namespace ldade {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_samples(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw Error("statistical comparison needs two nonempty samples");
}

}  // namespace

double a12(std::span<const double> xs, std::span<const double> ys) {
  require_samples(xs, ys);
  double wins = 0.0;
  for (double x : xs)
    for (double y : ys) {
      if (x > y) wins += 1.0;
      else if (x == y) wins += 0.5;
    }
  return wins / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

double bootstrap_test(std::span<const double> xs, std::span<const double> ys, int B,
                      std::uint64_t seed) {
  require_samples(xs, ys);
  if (B < 1) throw Error("bootstrap needs B >= 1");
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  const double pooled = (mx * xs.size() + my * ys.size()) / static_cast<double>(xs.size() + ys.size());
  std::vector<double> x0, y0;
  for (double x : xs) x0.push_back(x - mx + pooled);
  for (double y : ys) y0.push_back(y - my + pooled);
  const double observed = std::abs(mx - my);

  Rng rng(seed);
  auto resample_mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[rng.below(v.size())];
    return s / static_cast<double>(v.size());
  };
  int extreme = 0;
  for (int b = 0; b < B; ++b) {
    const double diff = resample_mean(x0) - resample_mean(y0);
    // Tolerance keeps a zero observed difference from losing to rounding noise.
    if (std::abs(diff) >= observed - 1e-12) ++extreme;
  }
  return static_cast<double>(extreme) / B;
}

namespace {

struct SortedGroup {
  const SampleGroup* group;
  double median;
  double mean;
};

void split(std::span<const SortedGroup> groups, std::size_t offset, const StatsConfig& config,
           std::uint64_t seed, std::vector<int>& cut_after) {
  if (groups.size() < 2) return;
  std::vector<double> all;
  for (const auto& g : groups) all.insert(all.end(), g.group->values.begin(), g.group->values.end());
  const double grand = mean_of(all);

  std::size_t best_cut = 0;
  double best_ss = -1.0;
  for (std::size_t cut = 1; cut < groups.size(); ++cut) {
    double ss = 0.0;
    for (auto [lo, hi] : {std::pair{std::size_t{0}, cut}, std::pair{cut, groups.size()}}) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        for (double v : groups[i].group->values) sum += v;
        n += groups[i].group->values.size();
      }
      const double m = sum / static_cast<double>(n);
      ss += static_cast<double>(n) * (m - grand) * (m - grand);
    }
    if (ss > best_ss + 1e-12) {
      best_ss = ss;
      best_cut = cut;
    }
  }

  std::vector<double> upper, lower;
  for (std::size_t i = 0; i < best_cut; ++i)
    upper.insert(upper.end(), groups[i].group->values.begin(), groups[i].group->values.end());
  for (std::size_t i = best_cut; i < groups.size(); ++i)
    lower.insert(lower.end(), groups[i].group->values.begin(), groups[i].group->values.end());

  const auto test_seed = derive_seed(seed, {offset, groups.size()});
  const bool significant =
      bootstrap_test(upper, lower, config.bootstrap_samples, test_seed) < config.significance;
  const bool large = a12(upper, lower) >= config.a12_threshold;
  if (!significant || !large) return;

  cut_after.push_back(static_cast<int>(offset + best_cut));
  split(groups.subspan(0, best_cut), offset, config, seed, cut_after);
  split(groups.subspan(best_cut), offset + best_cut, config, seed, cut_after);
}

}  // namespace

std::vector<RankedGroup> scott_knott(std::span<const SampleGroup> groups, const StatsConfig& config,
                                     std::uint64_t seed) {
  if (groups.empty()) throw Error("scott-knott needs at least one group");
  if (!(config.significance > 0.0 && config.significance < 1.0))
    throw Error("significance must lie in (0, 1)");
  if (!(config.a12_threshold >= 0.5 && config.a12_threshold <= 1.0))
    throw Error("a12 threshold must lie in [0.5, 1]");

  std::vector<SortedGroup> sorted;
  for (const auto& g : groups) {
    if (g.values.empty()) throw Error("group '" + g.name + "' has no values");
    sorted.push_back({&g, median(g.values), mean_of(g.values)});
  }
  std::sort(sorted.begin(), sorted.end(), [](const SortedGroup& a, const SortedGroup& b) {
    if (a.median != b.median) return a.median > b.median;
    if (a.group->name != b.group->name) return a.group->name < b.group->name;
    return a.group->values < b.group->values;
  });

  std::vector<int> cuts;
  split(sorted, 0, config, seed, cuts);
  std::sort(cuts.begin(), cuts.end());

  std::vector<RankedGroup> out;
  int rank = 1;
  std::size_t next_cut = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    while (next_cut < cuts.size() && static_cast<std::size_t>(cuts[next_cut]) == i) {
      ++rank;
      ++next_cut;
    }
    out.push_back({sorted[i].group->name, rank, sorted[i].median, sorted[i].mean,
                   sorted[i].group->values.size()});
  }
  return out;
}

std::vector<SampleGroup> parse_groups_csv(const std::string& text) {
  const auto rows = io::parse_csv(text);
  std::map<std::string, std::vector<double>> by_name;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2)
      throw Error("line " + std::to_string(r + 1) + ": expected 2 fields (group,value)");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(row[1], &used);
      if (used != row[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      if (r == 0) continue;  // header
      throw Error("line " + std::to_string(r + 1) + ": value '" + row[1] + "' is not a number");
    }
    if (!by_name.count(row[0])) order.push_back(row[0]);
    by_name[row[0]].push_back(v);
  }
  if (order.empty()) throw Error("no samples found");
  std::vector<SampleGroup> groups;
  for (const auto& name : order) groups.push_back({name, by_name[name]});
  return groups;
}

std::string ranked_groups_csv(std::span<const RankedGroup> ranked) {
  std::ostringstream out;
  out << "rank,group,n,median,mean\n";
  for (const auto& g : ranked)
    out << g.rank << ',' << io::csv_escape(g.name) << ',' << g.size << ',' << format_real(g.median)
        << ',' << format_real(g.mean) << '\n';
  return out.str();
}

}  // namespace ldade
