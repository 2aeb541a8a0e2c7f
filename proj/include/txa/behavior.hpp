#pragma once

#include "txa/coicop.hpp"
#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace txa {

/// Per-user merchant-transition chain over one window. States are the
/// distinct merchants the user visited inside the window, listed by merchant
/// index ascending; `transition` is row-stochastic with dangling rows
/// (states with no outgoing pair) set to uniform.
struct MobilityChain {
  std::uint32_t user = 0;
  Day window_start = 0;
  int window_days = 28;
  std::vector<std::uint32_t> states;  // global merchant indices
  Matrix transition;
};

/// Builds the chain from the user's purchases in [window_start,
/// window_start + window_days), ordered by (day, time, merchant, row).
/// Returns nullopt when the window has fewer than two purchases.
std::optional<MobilityChain> build_chain(const TransactionTable& table, std::string_view user,
                                         Day window_start, int window_days = 28);

/// Same, over a pre-sorted span of the user's row indices (canonical order);
/// used by the weekly panel to avoid re-sorting per window.
std::optional<MobilityChain> build_chain_rows(const TransactionTable& table,
                                              std::span<const std::uint32_t> user_rows,
                                              std::uint32_t user, Day window_start,
                                              int window_days = 28);

/// Stationary row vector of a row-stochastic matrix: power iteration on the
/// half-lazy chain (T+I)/2 (same fixed point, guaranteed aperiodic) from the
/// uniform start, to `tol` in the sup norm. The result satisfies pi*T = pi
/// within kStationaryCertTol and sums to 1. Throws ConvergenceError with
/// iteration diagnostics when max_iter is exhausted.
inline constexpr double kStationaryCertTol = 1e-8;
Vector stationary(const Matrix& T, double tol = 1e-10, int max_iter = 200000);

/// Stationary mass aggregated into categories and sorted descending (ties by
/// category code). All kCategoryCount categories are retained, zero-mass
/// ones at the tail.
struct RelevanceList {
  std::vector<int> categories;  // 1-based codes, by descending mass
  Vector masses;                // aligned, sums to 1
};

RelevanceList category_relevance(const Vector& pi, std::span<const std::uint32_t> states,
                                 std::span<const int> merchant_category);

/// Discounted cumulative gain of a descending relevance list:
/// sum_i (2^rel_i - 1) / log2(i + 2) for 0-based i.
double dcg(const Vector& relevance_desc);

/// Week-over-week gain ratio; nullopt when the previous gain is zero.
std::optional<double> ndcg(double dcg_now, double dcg_prev);

inline constexpr int kChainWindowDays = 28;
inline constexpr int kChainStepDays = 7;

struct BehaviorOptions {
  int window_days = kChainWindowDays;
  int step_days = kChainStepDays;
  double stationary_tol = 1e-10;
  bool keep_user_series = false;
  int workers = 1;
};

/// Weekly per-district behavior panel. Chains summarize the trailing
/// window_days ending at each label date; the nDCG at a label compares it to
/// the label one step earlier. mean_ndcg is NaN where no user has a defined
/// value.
struct BehaviorPanel {
  std::vector<Day> labels;        // window end dates, step_days apart
  Matrix mean_ndcg;               // districts x labels, NaN when undefined
  Eigen::MatrixXi user_counts;    // districts x labels
  // Per-user traces (only when keep_user_series): user_ndcg[u][k] aligns
  // with labels, NaN when undefined.
  std::vector<std::vector<double>> user_ndcg;
};

BehaviorPanel behavior_panel(const TransactionTable& table, const CoicopMapper& mapper,
                             const BehaviorOptions& opts = {});

}  // namespace txa
