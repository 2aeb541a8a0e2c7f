#include "txa/corestruct.hpp"

#include "txa/coicop.hpp"
#include "txa/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace txa {

CorePartition rich_core(const GraphSnapshot& g, CoreWeighting weighting) {
  const auto n = g.size();
  if (n == 0) throw Error("rich_core: empty snapshot");
  CorePartition part;
  part.date = g.date;

  std::vector<double> strength(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (auto e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
      strength[v] += g.weight[e];
      strength[g.col[e]] += g.weight[e];
    }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (strength[a] != strength[b]) return strength[a] > strength[b];
    return g.vertices[a] < g.vertices[b];
  });
  std::vector<std::size_t> rank_of(n);  // local vertex -> 0-based rank
  for (std::size_t r = 0; r < n; ++r) rank_of[order[r]] = r;

  // Upward mass per rank: weight on edges (either direction) joining a
  // vertex to strictly higher-ranked ones.
  part.k_plus.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
      const auto u = g.col[e];
      if (u == v) continue;  // self-loops carry no upward mass
      const double w = weighting == CoreWeighting::Weighted ? g.weight[e] : 1.0;
      if (rank_of[u] < rank_of[v])
        part.k_plus[rank_of[v]] += w;
      else if (rank_of[v] < rank_of[u])
        part.k_plus[rank_of[u]] += w;
    }
  }

  // Boundary: first rank attaining the max over ranks 1..N-1 (the last rank
  // is excluded from the scan; see the header note).
  const std::size_t scan_end = n > 1 ? n - 1 : 1;
  std::size_t best = 0;
  for (std::size_t r = 1; r < scan_end; ++r)
    if (part.k_plus[r] > part.k_plus[best]) best = r;
  part.r_star = best + 1;

  part.ranked.reserve(n);
  for (auto v : order) part.ranked.push_back(g.vertices[v]);
  part.core.assign(part.ranked.begin(), part.ranked.begin() + static_cast<std::ptrdiff_t>(part.r_star));
  part.periphery.assign(part.ranked.begin() + static_cast<std::ptrdiff_t>(part.r_star),
                        part.ranked.end());
  return part;
}

CoreSizeSeries core_size_series(std::span<const GraphSnapshot> snapshots,
                                CoreWeighting weighting, int workers) {
  if (snapshots.empty()) throw Error("core_size_series: no snapshots");
  CoreSizeSeries series;
  series.sizes.resize(static_cast<Eigen::Index>(snapshots.size()));
  series.dates.resize(snapshots.size());
  std::vector<double> sizes(snapshots.size(), 0.0);
  parallel_for(snapshots.size(), workers, [&](std::size_t i) {
    series.dates[i] = snapshots[i].date;
    sizes[i] = snapshots[i].size() == 0
                   ? 0.0
                   : static_cast<double>(rich_core(snapshots[i], weighting).core.size());
  });
  for (std::size_t i = 0; i < sizes.size(); ++i)
    series.sizes(static_cast<Eigen::Index>(i)) = sizes[i];
  series.mean = mean(sizes);
  series.stddev = sizes.size() > 1 ? txa::stddev(sizes, 1) : 0.0;
  return series;
}

std::vector<EventZ> zscore_events(const CoreSizeSeries& series, std::span<const Day> events) {
  if (series.stddev <= 0.0) throw Error("zscore_events: series deviation is zero");
  std::vector<EventZ> out;
  for (Day d : events) {
    const auto it = std::find(series.dates.begin(), series.dates.end(), d);
    if (it == series.dates.end())
      throw Error("zscore_events: date " + format_date(d) + " outside the series");
    EventZ ev;
    ev.date = d;
    ev.size = series.sizes(it - series.dates.begin());
    ev.z = (ev.size - series.mean) / series.stddev;
    out.push_back(ev);
  }
  return out;
}

KsResult ks_normal(std::span<const double> values) {
  return ks_test_normal(values, mean(values), stddev(values, 1));
}

KsResult ks_normal(std::span<const double> values, double mu, double sigma) {
  return ks_test_normal(values, mu, sigma);
}

Vector core_category_fraction(const CorePartition& partition,
                              std::span<const int> merchant_category) {
  Vector frac = Vector::Zero(kCategoryCount);
  if (partition.core.empty()) return frac;
  for (auto m : partition.core) {
    if (m >= merchant_category.size())
      throw Error("core_category_fraction: merchant " + std::to_string(m) + " has no category");
    const int cat = merchant_category[m];
    if (cat < 1 || cat > kCategoryCount)
      throw Error("core_category_fraction: category out of range");
    frac(cat - 1) += 1.0;
  }
  return frac / static_cast<double>(partition.core.size());
}

std::vector<int> kshell(const GraphSnapshot& g) {
  const auto n = g.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  {
    // Undirected unweighted skeleton: merge directions, drop self-loops.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::size_t v = 0; v < n; ++v)
      for (auto e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
        const auto u = g.col[e];
        if (u == static_cast<std::uint32_t>(v)) continue;
        edges.emplace_back(std::min<std::uint32_t>(v, u), std::max<std::uint32_t>(v, u));
      }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  }

  // Peeling in increasing-degree order (bucket variant).
  std::vector<int> degree(n), shell(n, 0);
  for (std::size_t v = 0; v < n; ++v) degree[v] = static_cast<int>(adj[v].size());
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return degree[a] < degree[b]; });
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;
  const int max_deg = n ? *std::max_element(degree.begin(), degree.end()) : 0;
  std::vector<std::size_t> bucket_start(static_cast<std::size_t>(max_deg) + 2, 0);
  for (std::size_t v = 0; v < n; ++v) ++bucket_start[degree[v] + 1];
  for (std::size_t d = 1; d < bucket_start.size(); ++d) bucket_start[d] += bucket_start[d - 1];

  std::vector<int> cur_deg = degree;
  int level = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = order[i];
    level = std::max(level, cur_deg[v]);
    shell[v] = level;
    for (auto u : adj[v]) {
      if (cur_deg[u] <= cur_deg[v]) continue;  // already peeled or tied
      // Move u one bucket down: swap it to the front of its bucket.
      const auto du = cur_deg[u];
      const auto front = bucket_start[du];
      const auto w = order[front];
      if (w != u) {
        std::swap(order[pos[u]], order[front]);
        std::swap(pos[u], pos[w]);
      }
      ++bucket_start[du];
      --cur_deg[u];
    }
  }
  return shell;
}

ShellDynamics shell_dynamics(std::span<const GraphSnapshot> snapshots, int dt, int workers) {
  if (dt < 1) throw Error("shell_dynamics: dt must be >= 1");
  if (snapshots.size() < static_cast<std::size_t>(dt) + 1)
    throw Error("shell_dynamics: not enough snapshots for dt");

  std::vector<std::vector<int>> shells(snapshots.size());
  parallel_for(snapshots.size(), workers, [&](std::size_t i) { shells[i] = kshell(snapshots[i]); });

  int max_shell = 0;
  for (const auto& s : shells)
    for (int v : s) max_shell = std::max(max_shell, v);

  ShellDynamics dyn;
  dyn.transitions = Matrix::Zero(max_shell + 1, max_shell + 1);
  dyn.shell_mass = Vector::Zero(max_shell + 1);

  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& g = snapshots[i];
    std::vector<double> in_w(g.size(), 0.0);
    for (std::size_t v = 0; v < g.size(); ++v)
      for (auto e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) in_w[g.col[e]] += g.weight[e];
    for (std::size_t v = 0; v < g.size(); ++v) dyn.shell_mass(shells[i][v]) += in_w[v];
  }

  for (std::size_t i = 0; i + dt < snapshots.size(); ++i) {
    const auto& a = snapshots[i];
    const auto& b = snapshots[i + dt];
    // Vertices absent on either side sit in shell 0 there.
    for (std::size_t v = 0; v < a.size(); ++v) {
      const auto j = b.local_index(a.vertices[v]);
      const int to = j < 0 ? 0 : shells[i + dt][static_cast<std::size_t>(j)];
      dyn.transitions(shells[i][v], to) += 1.0;
    }
    for (std::size_t v = 0; v < b.size(); ++v) {
      if (a.local_index(b.vertices[v]) >= 0) continue;  // counted above
      dyn.transitions(0, shells[i + dt][v]) += 1.0;
    }
  }
  return dyn;
}

}  // namespace txa
