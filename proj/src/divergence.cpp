#include "txa/divergence.hpp"

#include <map>

namespace txa {

DivergenceSeries d1_series(const SharePanel& panel, std::uint16_t district, int w,
                           double smoothing) {
  if (w <= 0) throw Error("d1_series: w must be positive");
  DivergenceSeries out;
  out.district = district;
  out.kind = DivergenceKind::D1;
  out.w = w;
  const Vector ref = panel.country_reference();
  std::vector<double> vals;
  for (Day j = panel.start(); j + w <= panel.end(); ++j) {
    const ShareVector sv = panel.window(district, j, w);
    if (sv.empty) continue;
    out.dates.push_back(j);
    vals.push_back(kld(sv.shares, ref, smoothing));
  }
  out.values = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

DivergenceSeries d2_series(const SharePanel& panel, std::uint16_t district, int w,
                           double smoothing) {
  if (w <= 0) throw Error("d2_series: w must be positive");
  DivergenceSeries out;
  out.district = district;
  out.kind = DivergenceKind::D2;
  out.w = w;
  std::vector<double> vals;
  // Window starts need w trailing reference windows, the earliest of which
  // begins at j - w.
  for (Day j = panel.start() + w; j + w <= panel.end(); ++j) {
    const ShareVector cur = panel.window(district, j, w);
    if (cur.empty) continue;
    double acc = 0.0;
    int n_refs = 0;
    for (int d = 1; d <= w; ++d) {
      const Day ref_start = j - w - 1 + d;  // j-w .. j-1
      const ShareVector ref = panel.window(district, ref_start, w);
      if (ref.empty) continue;
      acc += kld(cur.shares, ref.shares, smoothing);
      ++n_refs;
    }
    if (n_refs == 0) continue;
    out.dates.push_back(j);
    vals.push_back(acc / static_cast<double>(n_refs));
  }
  out.values = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

DivergencePanel divergence_panel(const std::vector<DivergenceSeries>& series) {
  if (series.empty()) throw Error("divergence_panel: no series given");
  std::map<Day, std::vector<double>> by_date;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.dates.size(); ++i)
      by_date[s.dates[i]].push_back(s.values(static_cast<Eigen::Index>(i)));

  DivergencePanel out;
  const auto n = static_cast<Eigen::Index>(by_date.size());
  out.mean.resize(n);
  out.q25.resize(n);
  out.q50.resize(n);
  out.q75.resize(n);
  Eigen::Index r = 0;
  for (auto& [date, vals] : by_date) {
    out.dates.push_back(date);
    out.n_districts.push_back(static_cast<int>(vals.size()));
    out.mean(r) = mean(vals);
    out.q25(r) = percentile(vals, 0.25);
    out.q50(r) = percentile(vals, 0.50);
    out.q75(r) = percentile(vals, 0.75);
    ++r;
  }
  return out;
}

}  // namespace txa
