#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ldade {

struct SampleGroup {
  std::string name;
  std::vector<double> values;
};

/// Vargha-Delaney A12: P(x > y) + 0.5 P(x = y) over all pairs.
double a12(std::span<const double> xs, std::span<const double> ys);

/// Two-sided bootstrap test of a mean difference. Both samples are shifted to
/// the pooled mean (the null), resampled with replacement B times, and
/// p = #{|diff*| >= |diff observed|} / B.
double bootstrap_test(std::span<const double> xs, std::span<const double> ys, int B,
                      std::uint64_t seed);

struct StatsConfig {
  double significance = 0.01;
  double a12_threshold = 0.6;
  int bootstrap_samples = 1000;
};

struct RankedGroup {
  std::string name;
  int rank = 1;  // 1 = best (highest) median
  double median = 0.0;
  double mean = 0.0;
  std::size_t size = 0;
};

/// Scott-Knott clustering of groups sorted by median (highest first). A split
/// is kept only when the bootstrap test rejects at `significance` and the
/// upper half beats the lower with A12 >= a12_threshold. Output is in rank
/// order; ties in median are broken by name, so input order does not matter.
std::vector<RankedGroup> scott_knott(std::span<const SampleGroup> groups, const StatsConfig& config,
                                     std::uint64_t seed);

/// Reads `group,value` rows (header optional).
std::vector<SampleGroup> parse_groups_csv(const std::string& text);

/// `rank,group,n,median,mean` table.
std::string ranked_groups_csv(std::span<const RankedGroup> ranked);

}  // namespace ldade
