#pragma once

#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <span>
#include <vector>

namespace txa {

inline constexpr int kSnapshotHalfWidth = 4;  // snapshot support is [t-4, t+4]
inline constexpr double kPagerankAlpha = 0.85;
inline constexpr double kPagerankTol = 1e-10;

/// Directed, weighted merchant graph for one snapshot day. Vertices are all
/// merchants with at least one purchase inside the support window (isolated
/// ones included); an edge u -> v accumulates one unit of weight for every
/// user whose consecutive purchases inside the window go from u to v
/// (self-loops kept). Stored as CSR over local indices; `vertices` maps
/// local -> global merchant index and is sorted ascending.
struct GraphSnapshot {
  Day date = 0;
  std::vector<std::uint32_t> vertices;
  std::vector<std::uint32_t> row_ptr;  // size vertices.size() + 1
  std::vector<std::uint32_t> col;      // local destination indices
  std::vector<double> weight;

  std::size_t size() const { return vertices.size(); }
  std::size_t edge_count() const { return col.size(); }
  /// Local index of a global merchant, or -1 when absent.
  std::ptrdiff_t local_index(std::uint32_t merchant) const;
  double out_strength(std::size_t local) const;
  double in_strength(std::size_t local) const;
};

/// Snapshot for day t over [t - halfwidth, t + halfwidth].
GraphSnapshot build_snapshot(const TransactionTable& table, Day t,
                             int halfwidth = kSnapshotHalfWidth);

/// Snapshots for every day in [from, to] (shared pair enumeration).
std::vector<GraphSnapshot> build_snapshots(const TransactionTable& table, Day from, Day to,
                                           int halfwidth = kSnapshotHalfWidth, int workers = 1);

/// PageRank scores by power iteration on the damped random walk: rows are
/// out-weight-normalized, dangling rows redistribute uniformly, teleport
/// weight (1 - alpha). Scores sum to 1. Throws ConvergenceError when the
/// sup-norm step change stays above tol for max_iter rounds.
Vector pagerank(const GraphSnapshot& snapshot, double alpha = kPagerankAlpha,
                double tol = kPagerankTol, int max_iter = 1000);

/// Normalized rank r_i = 1 - (c_i - 1) / max_j c_j where c is the descending
/// competition ordinal of the score (equal scores share the better ordinal).
/// The top score maps to 1 for any vertex count.
Vector normalized_rank(const Vector& scores);

/// Per-merchant normalized-rank trajectories across snapshots. NaN marks
/// dates where the merchant is absent from the snapshot.
struct RankPanel {
  std::vector<Day> dates;
  std::vector<std::uint32_t> merchants;  // global indices with >= 1 appearance
  Matrix rank;                           // merchants x dates, NaN = absent
};

RankPanel rank_panel(std::span<const GraphSnapshot> snapshots, double alpha = kPagerankAlpha,
                     double tol = kPagerankTol, int workers = 1);

struct RankSeries {
  std::uint32_t merchant = 0;
  std::vector<Day> dates;
  Vector values;  // NaN = absent
};

/// Extracts one merchant's trajectory; throws when the merchant never
/// appears in any snapshot.
RankSeries rank_series(const RankPanel& panel, std::uint32_t merchant);

}  // namespace txa
