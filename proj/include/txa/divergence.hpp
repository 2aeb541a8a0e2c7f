#pragma once

#include "txa/shares.hpp"

#include <vector>

namespace txa {

inline constexpr double kKldSmoothing = 1e-9;

/// Kullback-Leibler divergence in bits, sum_k P(k) * log2(P(k)/Q(k)) with
/// 0 * log 0 = 0. When smoothing > 0, Q gets additive smoothing and is
/// renormalized so every component is positive; smoothing == 0 is strict
/// mode, which throws when some Q(k) = 0 where P(k) > 0. Templated on the
/// Eigen expression so slices can be passed without materializing.
template <typename DerivedP, typename DerivedQ>
double kld(const Eigen::MatrixBase<DerivedP>& P, const Eigen::MatrixBase<DerivedQ>& Q,
           double smoothing = kKldSmoothing) {
  if (P.size() != Q.size()) throw Error("kld: dimension mismatch");
  const auto n = P.size();
  double renorm = 1.0;
  if (smoothing > 0.0) renorm = Q.sum() + smoothing * static_cast<double>(n);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = P(k);
    if (p <= 0.0) continue;
    const double q = smoothing > 0.0 ? (Q(k) + smoothing) / renorm : double(Q(k));
    if (q <= 0.0) throw Error("kld: Q has zero mass where P does not (strict mode)");
    acc += p * std::log2(p / q);
  }
  return acc;
}

enum class DivergenceKind { D1, D2 };

/// One district's divergence trace. Values are labeled by window start; only
/// dates with a defined value appear (empty windows and starts without
/// enough trailing history are skipped).
struct DivergenceSeries {
  std::uint16_t district = 0;
  DivergenceKind kind = DivergenceKind::D1;
  int w = 7;
  std::vector<Day> dates;
  Vector values;
};

/// D1: divergence of each district window [j, j+w) from the whole-population
/// reference mix.
DivergenceSeries d1_series(const SharePanel& panel, std::uint16_t district, int w = 7,
                           double smoothing = kKldSmoothing);

/// D2: self-referential divergence of window [j, j+w) against the w windows
/// starting j-w .. j-1, averaged; empty reference windows are dropped from
/// the average.
DivergenceSeries d2_series(const SharePanel& panel, std::uint16_t district, int w = 7,
                           double smoothing = kKldSmoothing);

/// Cross-district aggregation per date: mean and interpolated quartiles over
/// the districts that have a value on that date.
struct DivergencePanel {
  std::vector<Day> dates;
  Vector mean, q25, q50, q75;
  std::vector<int> n_districts;  // contributing series per date
};

DivergencePanel divergence_panel(const std::vector<DivergenceSeries>& series);

}  // namespace txa
