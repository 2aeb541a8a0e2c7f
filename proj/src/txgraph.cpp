#include "txa/txgraph.hpp"

#include "txa/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace txa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PairEvent {
  Day d_first, d_second;
  std::uint32_t src, dst;
};

struct Presence {
  Day date;
  std::uint32_t merchant;
};

// Shared preprocossing for snapshot construction: global consecutive-purchase
// pairs (restricting a user's sequence to a window keeps exactly the pairs
// whose endpoints both fall inside it) and date-sorted merchant presences.
struct SnapshotPrep {
  std::vector<PairEvent> pairs;      // sorted by d_second
  std::vector<Presence> presences;   // sorted by date
};

SnapshotPrep prepare(const TransactionTable& table, int halfwidth) {
  SnapshotPrep prep;
  const auto order = table.order_by_client_time();
  prep.presences.reserve(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i)
    prep.presences.push_back({table.date[i], table.merchant[i]});
  std::sort(prep.presences.begin(), prep.presences.end(),
            [](const Presence& a, const Presence& b) { return a.date < b.date; });

  const int span = 2 * halfwidth;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto a = order[k], b = order[k + 1];
    if (table.client[a] != table.client[b]) continue;
    if (table.date[b] - table.date[a] > span) continue;  // can never share a window
    prep.pairs.push_back({table.date[a], table.date[b], table.merchant[a], table.merchant[b]});
  }
  std::sort(prep.pairs.begin(), prep.pairs.end(),
            [](const PairEvent& a, const PairEvent& b) { return a.d_second < b.d_second; });
  return prep;
}

GraphSnapshot build_day(const SnapshotPrep& prep, Day t, int halfwidth) {
  const Day lo = t - halfwidth, hi = t + halfwidth;
  GraphSnapshot g;
  g.date = t;

  const auto p_begin = std::lower_bound(prep.presences.begin(), prep.presences.end(), lo,
                                        [](const Presence& p, Day d) { return p.date < d; });
  for (auto it = p_begin; it != prep.presences.end() && it->date <= hi; ++it)
    g.vertices.push_back(it->merchant);
  std::sort(g.vertices.begin(), g.vertices.end());
  g.vertices.erase(std::unique(g.vertices.begin(), g.vertices.end()), g.vertices.end());
  if (g.vertices.empty()) {
    g.row_ptr.assign(1, 0);
    return g;
  }

  auto local = [&](std::uint32_t m) {
    return static_cast<std::uint32_t>(
        std::lower_bound(g.vertices.begin(), g.vertices.end(), m) - g.vertices.begin());
  };

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  const auto e_begin = std::lower_bound(prep.pairs.begin(), prep.pairs.end(), lo,
                                        [](const PairEvent& p, Day d) { return p.d_second < d; });
  for (auto it = e_begin; it != prep.pairs.end() && it->d_second <= hi; ++it) {
    if (it->d_first < lo) continue;
    edges.emplace_back(local(it->src), local(it->dst));
  }
  std::sort(edges.begin(), edges.end());

  const auto n = g.vertices.size();
  g.row_ptr.assign(n + 1, 0);
  for (std::size_t k = 0; k < edges.size();) {
    std::size_t j = k;
    while (j < edges.size() && edges[j] == edges[k]) ++j;
    g.col.push_back(edges[k].second);
    g.weight.push_back(static_cast<double>(j - k));
    ++g.row_ptr[edges[k].first + 1];
    k = j;
  }
  for (std::size_t v = 0; v < n; ++v) g.row_ptr[v + 1] += g.row_ptr[v];
  return g;
}

}  // namespace

std::ptrdiff_t GraphSnapshot::local_index(std::uint32_t merchant) const {
  const auto it = std::lower_bound(vertices.begin(), vertices.end(), merchant);
  if (it == vertices.end() || *it != merchant) return -1;
  return it - vertices.begin();
}

double GraphSnapshot::out_strength(std::size_t local) const {
  double s = 0.0;
  for (auto e = row_ptr[local]; e < row_ptr[local + 1]; ++e) s += weight[e];
  return s;
}

double GraphSnapshot::in_strength(std::size_t local) const {
  double s = 0.0;
  for (std::size_t e = 0; e < col.size(); ++e)
    if (col[e] == local) s += weight[e];
  return s;
}

GraphSnapshot build_snapshot(const TransactionTable& table, Day t, int halfwidth) {
  if (halfwidth < 0) throw Error("build_snapshot: negative halfwidth");
  return build_day(prepare(table, halfwidth), t, halfwidth);
}

std::vector<GraphSnapshot> build_snapshots(const TransactionTable& table, Day from, Day to,
                                           int halfwidth, int workers) {
  if (to < from) throw Error("build_snapshots: empty date range");
  if (halfwidth < 0) throw Error("build_snapshots: negative halfwidth");
  const auto prep = prepare(table, halfwidth);
  std::vector<GraphSnapshot> out(static_cast<std::size_t>(to - from + 1));
  parallel_for(out.size(), workers,
               [&](std::size_t i) { out[i] = build_day(prep, from + static_cast<Day>(i), halfwidth); });
  return out;
}

Vector pagerank(const GraphSnapshot& g, double alpha, double tol, int max_iter) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n == 0) throw Error("pagerank: empty snapshot");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error("pagerank: alpha outside [0,1)");
  const double uniform = 1.0 / static_cast<double>(n);
  if (n == 1) return Vector::Ones(1);

  std::vector<double> strength(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) strength[v] = g.out_strength(v);

  Vector x = Vector::Constant(n, uniform);
  Vector next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v)
      if (strength[v] <= 0.0) dangling += x(static_cast<Eigen::Index>(v));
    next.setConstant((1.0 - alpha) * uniform + alpha * dangling * uniform);
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (strength[v] <= 0.0) continue;
      const double push = alpha * x(static_cast<Eigen::Index>(v)) / strength[v];
      for (auto e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e)
        next(static_cast<Eigen::Index>(g.col[e])) += push * g.weight[e];
    }
    next /= next.sum();  // guard accumulated round-off
    const double delta = (next - x).lpNorm<1>();
    x.swap(next);
    if (delta <= tol) return x;
  }
  throw ConvergenceError("pagerank: no convergence after " + std::to_string(max_iter) +
                         " iterations");
}

Vector normalized_rank(const Vector& scores) {
  const auto n = scores.size();
  if (n == 0) throw Error("normalized_rank: empty score vector");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });

  // Competition ordinals: equal scores share the better (smaller) ordinal.
  std::vector<double> ordinal(static_cast<std::size_t>(n));
  double c_max = 1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && scores(order[k]) == scores(order[k - 1]))
      ordinal[order[k]] = ordinal[order[k - 1]];
    else
      ordinal[order[k]] = static_cast<double>(k + 1);
    c_max = std::max(c_max, ordinal[order[k]]);
  }

  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = 1.0 - (ordinal[i] - 1.0) / c_max;
  return r;
}

RankPanel rank_panel(std::span<const GraphSnapshot> snapshots, double alpha, double tol,
                     int workers) {
  if (snapshots.empty()) throw Error("rank_panel: no snapshots");
  RankPanel panel;
  std::vector<std::uint32_t> all;
  for (const auto& g : snapshots) {
    panel.dates.push_back(g.date);
    all.insert(all.end(), g.vertices.begin(), g.vertices.end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  panel.merchants = std::move(all);

  std::unordered_map<std::uint32_t, std::size_t> row_of;
  row_of.reserve(panel.merchants.size());
  for (std::size_t i = 0; i < panel.merchants.size(); ++i) row_of[panel.merchants[i]] = i;

  panel.rank = Matrix::Constant(static_cast<Eigen::Index>(panel.merchants.size()),
                                static_cast<Eigen::Index>(snapshots.size()), kNaN);
  parallel_for(snapshots.size(), workers, [&](std::size_t s) {
    const auto& g = snapshots[s];
    if (g.size() == 0) return;
    const Vector r = normalized_rank(pagerank(g, alpha, tol));
    for (std::size_t v = 0; v < g.size(); ++v)
      panel.rank(static_cast<Eigen::Index>(row_of.at(g.vertices[v])),
                 static_cast<Eigen::Index>(s)) = r(static_cast<Eigen::Index>(v));
  });
  return panel;
}

RankSeries rank_series(const RankPanel& panel, std::uint32_t merchant) {
  const auto it = std::lower_bound(panel.merchants.begin(), panel.merchants.end(), merchant);
  if (it == panel.merchants.end() || *it != merchant)
    throw Error("rank_series: merchant " + std::to_string(merchant) +
                " never appears in the snapshot range");
  RankSeries s;
  s.merchant = merchant;
  s.dates = panel.dates;
  s.values = panel.rank.row(it - panel.merchants.begin()).transpose();
  return s;
}

}  // namespace txa
