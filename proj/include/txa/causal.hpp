#pragma once

#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <string>
#include <vector>

namespace txa {

/// Linear counterfactual: observed ~ intercept + slope * control, fit by
/// least squares on the pre-intervention span.
struct CounterfactualModel {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  Vector residuals;  // pre-period observed - fitted
};

inline constexpr int kMinPrePeriod = 28;

/// Fits the model on aligned pre-period series. Throws on fewer than
/// kMinPrePeriod points or a constant control.
CounterfactualModel fit_counterfactual(const Vector& observed_pre, const Vector& control_pre);

enum class ImpactLabel { Negative, Positive, Neutral };

std::string_view to_string(ImpactLabel label);

struct ImpactEstimate {
  Vector predicted;      // counterfactual path over the post period
  Vector pointwise;      // observed - predicted
  double cumulative = 0.0;
  double lo = 0.0;       // interval on the cumulative effect
  double hi = 0.0;
  double confidence = 0.95;
  ImpactLabel label = ImpactLabel::Neutral;
};

/// Projects the counterfactual over the post period and brackets the
/// cumulative effect with a moving-block bootstrap (block length 7) of the
/// pre-period residuals. Labels: negative iff hi < 0, positive iff lo > 0,
/// neutral otherwise. Throws when n_bootstrap < 100.
ImpactEstimate estimate_impact(const CounterfactualModel& model, const Vector& observed_post,
                               const Vector& control_post, int n_bootstrap = 1000,
                               double confidence = 0.95, std::uint64_t seed = 1);

inline constexpr int kBootstrapBlockLen = 7;

struct DistrictImpact {
  std::string district;
  ImpactEstimate estimate;
};

struct ClassificationTable {
  std::vector<DistrictImpact> rows;  // stable input order
  int n_negative = 0;
  int n_positive = 0;
  int n_neutral = 0;
};

ClassificationTable classify_districts(std::vector<DistrictImpact> impacts);

/// Daily total consumption (by amount) for one district over [from, to].
/// Days without transactions contribute zero.
Vector daily_amount_series(const TransactionTable& table, std::uint16_t district, Day from,
                           Day to);

}  // namespace txa
