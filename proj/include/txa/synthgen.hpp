#pragma once

#include "txa/coicop.hpp"
#include "txa/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace txa {

enum class ShockKind { ConsumptionDrop, ConsumptionSurge, CategoryShift, EdgeThinning };

std::string_view to_string(ShockKind kind);
ShockKind shock_kind_from(std::string_view name);  // throws ConfigError

/// One planted disturbance. `districts` lists affected district names (empty
/// = all); the window is [start, end] inclusive. For CategoryShift,
/// `magnitude` is the fraction of the source category's probability mass
/// moved to the destination; for drops/surges it scales the purchase rate;
/// for EdgeThinning it shrinks the per-agent merchant pools.
struct ShockSpec {
  ShockKind kind = ShockKind::ConsumptionDrop;
  double magnitude = 0.0;  // in (0, 1]
  std::vector<std::string> districts;
  Day start = 0;
  Day end = 0;
  int from_category = 1;  // CategoryShift only
  int to_category = 6;
};

/// Agent-based scenario. Agents hold a home district, a log-normal spending
/// power, a personal merchant pool per category (preferential attachment on
/// a Zipf-like popularity), and purchase daily with Poisson counts modulated
/// by weekday and the active shocks.
struct ScenarioConfig {
  int n_agents = 1000;
  int n_merchants = 200;
  int n_districts = 10;
  int n_regions = 2;
  Day start_date = 0;
  Day end_date = 0;

  double daily_rate = 2.0;
  double rate_sigma = 0.25;       // per-agent log-normal rate heterogeneity
  double rate_ramp = 0.0;         // linear rate growth to (1+ramp) at end
  double weekend_boost = 0.25;    // weekend purchase-rate multiplier - 1
  double weekend_tilt = 0.30;     // weekend boost of recreation/restaurant mix
  double income_sigma = 0.8;      // log-normal spending-power sigma
  double amount_sigma = 0.5;      // per-transaction log-normal noise
  double pref_tilt = 0.05;        // per-district category-preference tilt
  int merchants_per_category = 2; // agent pool width

  std::vector<ShockSpec> shocks;

  static ScenarioConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  void validate() const;  // throws ConfigError
};

/// Deterministic generation: per-agent derived seeds, canonical output order
/// (date, agent, per-day sequence). The result is identical for any worker
/// count.
TransactionTable generate(const ScenarioConfig& config, std::uint64_t seed, int workers = 1);

/// Post-hoc shock injection on a materialized table. Supports
/// ConsumptionDrop (each affected row survives with probability
/// 1 - magnitude) and CategoryShift (each affected source-category row is
/// re-targeted to a destination-category merchant with probability =
/// magnitude). Surges and edge thinning only exist at generation time and
/// raise std::invalid_argument here.
TransactionTable inject_shock(const TransactionTable& table, const ShockSpec& spec,
                              std::uint64_t seed);

}  // namespace txa
