#include "txa/causal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace txa {

CounterfactualModel fit_counterfactual(const Vector& observed_pre, const Vector& control_pre) {
  if (observed_pre.size() != control_pre.size())
    throw Error("fit_counterfactual: series lengths differ");
  const auto n = observed_pre.size();
  if (n < kMinPrePeriod)
    throw Error("fit_counterfactual: pre-period too short (" + std::to_string(n) + " < " +
                std::to_string(kMinPrePeriod) + ")");

  const double mc = control_pre.mean();
  const double mo = observed_pre.mean();
  const Vector cc = control_pre.array() - mc;
  const Vector oc = observed_pre.array() - mo;
  const double sxx = cc.squaredNorm();
  if (sxx <= 0.0) throw Error("fit_counterfactual: control series is constant");

  CounterfactualModel m;
  m.slope = cc.dot(oc) / sxx;
  m.intercept = mo - m.slope * mc;
  m.residuals = observed_pre - (m.intercept + (m.slope * control_pre.array()).matrix().array()).matrix();
  const double dof = static_cast<double>(n - 2);
  m.slope_stderr = std::sqrt(m.residuals.squaredNorm() / dof / sxx);
  return m;
}

std::string_view to_string(ImpactLabel label) {
  switch (label) {
    case ImpactLabel::Negative: return "negative";
    case ImpactLabel::Positive: return "positive";
    case ImpactLabel::Neutral: return "neutral";
  }
  return "neutral";
}

ImpactEstimate estimate_impact(const CounterfactualModel& model, const Vector& observed_post,
                               const Vector& control_post, int n_bootstrap, double confidence,
                               std::uint64_t seed) {
  if (observed_post.size() != control_post.size())
    throw Error("estimate_impact: post series lengths differ");
  if (observed_post.size() == 0) throw Error("estimate_impact: empty post period");
  if (n_bootstrap < 100)
    throw Error("estimate_impact: n_bootstrap below the minimum of 100");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw Error("estimate_impact: confidence outside (0,1)");

  ImpactEstimate est;
  est.confidence = confidence;
  est.predicted = (model.intercept + (model.slope * control_post.array())).matrix();
  est.pointwise = observed_post - est.predicted;
  est.cumulative = est.pointwise.sum();

  // Null distribution of the cumulative effect: sums of post-length residual
  // paths stitched from moving blocks of the pre-period residuals.
  const auto n_post = static_cast<int>(observed_post.size());
  const auto n_res = static_cast<int>(model.residuals.size());
  const int block = std::min(kBootstrapBlockLen, n_res);
  const int n_starts = n_res - block + 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_starts - 1);

  std::vector<double> sums(static_cast<std::size_t>(n_bootstrap));
  for (auto& s : sums) {
    double acc = 0.0;
    int filled = 0;
    while (filled < n_post) {
      const int start = pick(rng);
      const int take = std::min(block, n_post - filled);
      for (int i = 0; i < take; ++i) acc += model.residuals(start + i);
      filled += take;
    }
    s = acc;
  }

  const double alpha = 1.0 - confidence;
  const double q_lo = percentile(sums, alpha / 2.0);
  const double q_hi = percentile(sums, 1.0 - alpha / 2.0);
  // Basic (pivotal) interval around the point estimate.
  est.lo = est.cumulative - q_hi;
  est.hi = est.cumulative - q_lo;

  if (est.hi < 0.0)
    est.label = ImpactLabel::Negative;
  else if (est.lo > 0.0)
    est.label = ImpactLabel::Positive;
  else
    est.label = ImpactLabel::Neutral;
  return est;
}

ClassificationTable classify_districts(std::vector<DistrictImpact> impacts) {
  ClassificationTable table;
  table.rows = std::move(impacts);
  for (const auto& row : table.rows) {
    switch (row.estimate.label) {
      case ImpactLabel::Negative: ++table.n_negative; break;
      case ImpactLabel::Positive: ++table.n_positive; break;
      case ImpactLabel::Neutral: ++table.n_neutral; break;
    }
  }
  return table;
}

Vector daily_amount_series(const TransactionTable& table, std::uint16_t district, Day from,
                           Day to) {
  if (to < from) throw Error("daily_amount_series: empty date range");
  Vector out = Vector::Zero(to - from + 1);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (table.district[i] != district) continue;
    if (table.date[i] < from || table.date[i] > to) continue;
    out(table.date[i] - from) += table.amount[i];
  }
  return out;
}

}  // namespace txa
