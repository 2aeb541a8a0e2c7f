#pragma once

#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace txa {

struct AmpOptions {
  /// Clients must clear this much spend to stay in the panel.
  double min_monthly = 30.0;
  /// PerMonth: every active month must clear the bar (strict >).
  /// Total: the whole-history sum must clear it.
  enum class Threshold { PerMonth, Total } mode = Threshold::PerMonth;
};

/// Average monthly purchase volume per retained client: total spend divided
/// by the number of calendar months with at least one purchase.
struct AmpResult {
  std::vector<std::uint32_t> client;  // client indices, ascending
  std::vector<double> amp;            // aligned with `client`
  std::uint64_t excluded = 0;         // clients dropped by the threshold
};

AmpResult compute_amp(const TransactionTable& table, const AmpOptions& opts = {});

/// Single-client AMP; nullopt when the client is absent from the table or
/// fails the spend threshold.
std::optional<double> compute_amp(const TransactionTable& table, std::string_view client,
                                  const AmpOptions& opts = {});

/// Nine socioeconomic classes by equal cuts of cumulative AMP mass: clients
/// are sorted by (amp, client index) ascending and client i lands in the
/// smallest class c with cum_i <= c/9 of total mass. Returns classes (1..9)
/// aligned with the AmpResult entries. Requires at least 9 clients.
std::vector<int> split_classes(const AmpResult& amp);

/// Gini coefficient over non-negative values (ascending sort internally):
/// G = sum_i (2i - n - 1) x_i / (n * sum x). Throws if any value is negative
/// or all are zero.
double compute_gini(std::span<const double> values);

struct DemographicsSummary {
  AmpResult amp;
  std::vector<int> classes;  // aligned with amp entries
  double gini = 0.0;
};

DemographicsSummary demographics(const TransactionTable& table, const AmpOptions& opts = {});

}  // namespace txa
