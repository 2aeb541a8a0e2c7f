#pragma once

#include "txa/stats.hpp"
#include "txa/txgraph.hpp"

#include <span>
#include <vector>

namespace txa {

enum class CoreWeighting { Weighted, UnweightedCount };

/// Rich-core split of a snapshot. Vertices are ranked by total strength
/// (in + out) descending, ties by vertex id ascending; k_plus[r] is the
/// summed weight (or link count) between the rank-r vertex and all
/// higher-ranked vertices. The boundary r* is the first rank attaining the
/// maximum of k_plus over ranks 1..N-1 — the lowest-ranked vertex is
/// excluded from the scan because its upward links are its entire strength,
/// which would degenerate tiny graphs to an all-core split. Core = ranks
/// 1..r*.
struct CorePartition {
  Day date = 0;
  std::vector<std::uint32_t> ranked;  // global merchant ids, rank order
  std::vector<double> k_plus;         // aligned with `ranked`
  std::size_t r_star = 0;             // 1-based boundary rank
  std::vector<std::uint32_t> core;    // global ids, rank order
  std::vector<std::uint32_t> periphery;
};

CorePartition rich_core(const GraphSnapshot& snapshot,
                        CoreWeighting weighting = CoreWeighting::Weighted);

struct CoreSizeSeries {
  std::vector<Day> dates;
  Vector sizes;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1)
};

CoreSizeSeries core_size_series(std::span<const GraphSnapshot> snapshots,
                                CoreWeighting weighting = CoreWeighting::Weighted,
                                int workers = 1);

struct EventZ {
  Day date = 0;
  double size = 0.0;
  double z = 0.0;
};

/// Standardizes the core size at each event date against the series moments.
/// Throws when a date is outside the series or the deviation is degenerate.
std::vector<EventZ> zscore_events(const CoreSizeSeries& series, std::span<const Day> events);

/// One-sample KS against a normal with moments fitted from the data (or
/// supplied explicitly).
KsResult ks_normal(std::span<const double> values);
KsResult ks_normal(std::span<const double> values, double mu, double sigma);

/// Category mix of the core members (fractions over kCategoryCount, sums to
/// 1 when the core is non-empty). `merchant_category` maps global merchant
/// index -> category code.
Vector core_category_fraction(const CorePartition& partition,
                              std::span<const int> merchant_category);

/// K-shell indices on the undirected, unweighted skeleton (self-loops
/// dropped, reciprocal edges merged). Returns one shell per local vertex.
std::vector<int> kshell(const GraphSnapshot& snapshot);

/// Shell transitions between snapshots dt apart plus per-shell in-weight
/// mass. A vertex absent from one side of a pair occupies shell 0 there.
struct ShellDynamics {
  Matrix transitions;  // (max_shell+1) x (max_shell+1) counts, [from][to]
  Vector shell_mass;   // summed in-weight per shell over all snapshots
};

ShellDynamics shell_dynamics(std::span<const GraphSnapshot> snapshots, int dt = 1,
                             int workers = 1);

}  // namespace txa
