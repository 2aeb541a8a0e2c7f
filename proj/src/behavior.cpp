#include "txa/behavior.hpp"

#include "txa/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace txa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<MobilityChain> chain_from_sequence(std::span<const std::uint32_t> merchants,
                                                 std::uint32_t user, Day window_start,
                                                 int window_days) {
  if (merchants.size() < 2) return std::nullopt;

  MobilityChain chain;
  chain.user = user;
  chain.window_start = window_start;
  chain.window_days = window_days;
  chain.states.assign(merchants.begin(), merchants.end());
  std::sort(chain.states.begin(), chain.states.end());
  chain.states.erase(std::unique(chain.states.begin(), chain.states.end()), chain.states.end());

  const auto n = static_cast<Eigen::Index>(chain.states.size());
  auto local = [&](std::uint32_t m) {
    return static_cast<Eigen::Index>(
        std::lower_bound(chain.states.begin(), chain.states.end(), m) - chain.states.begin());
  };

  Matrix counts = Matrix::Zero(n, n);
  for (std::size_t i = 0; i + 1 < merchants.size(); ++i)
    counts(local(merchants[i]), local(merchants[i + 1])) += 1.0;

  chain.transition = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double row_sum = counts.row(r).sum();
    if (row_sum > 0.0)
      chain.transition.row(r) = counts.row(r) / row_sum;
    else
      chain.transition.row(r).setConstant(1.0 / static_cast<double>(n));
  }
  return chain;
}

}  // namespace

std::optional<MobilityChain> build_chain_rows(const TransactionTable& table,
                                              std::span<const std::uint32_t> user_rows,
                                              std::uint32_t user, Day window_start,
                                              int window_days) {
  if (window_days <= 0) throw Error("build_chain: window_days must be positive");
  const Day window_end = window_start + window_days;
  // user_rows are already in canonical time order; slice the window.
  std::vector<std::uint32_t> seq;
  for (auto r : user_rows) {
    if (table.date[r] < window_start || table.date[r] >= window_end) continue;
    seq.push_back(table.merchant[r]);
  }
  return chain_from_sequence(seq, user, window_start, window_days);
}

std::optional<MobilityChain> build_chain(const TransactionTable& table, std::string_view user,
                                         Day window_start, int window_days) {
  const auto idx = table.find_client(user);
  if (!idx) throw Error("unknown client: " + std::string(user));
  const auto order = table.order_by_client_time();
  std::vector<std::uint32_t> rows;
  for (auto r : order)
    if (table.client[r] == *idx) rows.push_back(r);
  return build_chain_rows(table, rows, *idx, window_start, window_days);
}

Vector stationary(const Matrix& T, double tol, int max_iter) {
  if (T.rows() != T.cols() || T.rows() == 0) throw Error("stationary: matrix must be square");
  const auto n = T.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    if (std::abs(T.row(r).sum() - 1.0) > 1e-9)
      throw Error("stationary: row " + std::to_string(r) + " is not stochastic");
  }
  if (n == 1) return Vector::Ones(1);

  Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double delta = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    // Half-lazy update: pi' = 0.5 * (pi + pi * T).
    Vector next = 0.5 * (pi + (pi.transpose() * T).transpose());
    next /= next.sum();
    delta = (next - pi).lpNorm<Eigen::Infinity>();
    pi = std::move(next);
    if (delta <= tol) {
      const double cert = ((pi.transpose() * T).transpose() - pi).lpNorm<Eigen::Infinity>();
      if (cert > kStationaryCertTol)
        throw ConvergenceError("stationary: fixed-point certificate " + std::to_string(cert) +
                               " exceeds " + std::to_string(kStationaryCertTol));
      return pi;
    }
  }
  throw ConvergenceError("stationary: no convergence after " + std::to_string(max_iter) +
                         " iterations (last delta " + std::to_string(delta) + ")");
}

RelevanceList category_relevance(const Vector& pi, std::span<const std::uint32_t> states,
                                 std::span<const int> merchant_category) {
  if (static_cast<std::size_t>(pi.size()) != states.size())
    throw Error("category_relevance: pi/state size mismatch");
  Vector mass = Vector::Zero(kCategoryCount);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] >= merchant_category.size())
      throw Error("category_relevance: merchant " + std::to_string(states[i]) +
                  " has no category");
    const int cat = merchant_category[states[i]];
    if (cat < 1 || cat > kCategoryCount)
      throw Error("category_relevance: category out of range");
    mass(cat - 1) += pi(static_cast<Eigen::Index>(i));
  }

  std::vector<int> order(kCategoryCount);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mass(a) != mass(b)) return mass(a) > mass(b);
    return a < b;
  });

  RelevanceList out;
  out.masses.resize(kCategoryCount);
  for (int i = 0; i < kCategoryCount; ++i) {
    out.categories.push_back(order[i] + 1);
    out.masses(i) = mass(order[i]);
  }
  return out;
}

double dcg(const Vector& relevance_desc) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < relevance_desc.size(); ++i)
    acc += (std::exp2(relevance_desc(i)) - 1.0) /
           std::log2(static_cast<double>(i) + 2.0);
  return acc;
}

std::optional<double> ndcg(double dcg_now, double dcg_prev) {
  if (dcg_prev <= 0.0) return std::nullopt;
  return dcg_now / dcg_prev;
}

BehaviorPanel behavior_panel(const TransactionTable& table, const CoicopMapper& mapper,
                             const BehaviorOptions& opts) {
  if (table.empty()) throw Error("behavior_panel: empty table");
  if (opts.step_days <= 0 || opts.window_days <= 0)
    throw Error("behavior_panel: window/step must be positive");

  const Day first = table.min_date();
  const Day last = table.max_date();
  BehaviorPanel panel;
  for (Day label = first + opts.window_days; label <= last + 1; label += opts.step_days)
    panel.labels.push_back(label);
  const auto n_labels = panel.labels.size();
  const auto n_users = table.clients.size();
  const auto n_districts = table.districts.size();
  if (n_labels == 0) {
    panel.mean_ndcg = Matrix::Constant(n_districts, 0, kNaN);
    panel.user_counts = Eigen::MatrixXi::Zero(n_districts, 0);
    return panel;
  }

  // Canonical per-user row ranges.
  const auto order = table.order_by_client_time();
  std::vector<std::size_t> user_begin(n_users + 1, 0);
  for (auto r : order) ++user_begin[table.client[r] + 1];
  for (std::size_t u = 0; u < n_users; ++u) user_begin[u + 1] += user_begin[u];

  const auto categories = merchant_categories(table, mapper);
  const auto home = table.client_home_district();

  // Per-user weekly DCG then nDCG, filled in parallel (one slot per user).
  std::vector<std::vector<double>> user_ndcg(n_users);
  parallel_for(n_users, opts.workers, [&](std::size_t u) {
    std::span<const std::uint32_t> rows(order.data() + user_begin[u],
                                        user_begin[u + 1] - user_begin[u]);
    std::vector<double> gains(n_labels, kNaN);
    for (std::size_t k = 0; k < n_labels; ++k) {
      const Day start = panel.labels[k] - opts.window_days;
      auto chain = build_chain_rows(table, rows, static_cast<std::uint32_t>(u), start,
                                    opts.window_days);
      if (!chain) continue;
      const Vector pi = stationary(chain->transition, opts.stationary_tol);
      const auto rel = category_relevance(pi, chain->states, categories);
      gains[k] = dcg(rel.masses);
    }
    std::vector<double> ratios(n_labels, kNaN);
    for (std::size_t k = 1; k < n_labels; ++k) {
      if (std::isnan(gains[k]) || std::isnan(gains[k - 1])) continue;
      if (auto r = ndcg(gains[k], gains[k - 1])) ratios[k] = *r;
    }
    user_ndcg[u] = std::move(ratios);
  });

  panel.mean_ndcg = Matrix::Constant(n_districts, static_cast<Eigen::Index>(n_labels), kNaN);
  panel.user_counts = Eigen::MatrixXi::Zero(n_districts, static_cast<Eigen::Index>(n_labels));
  Matrix sums = Matrix::Zero(n_districts, static_cast<Eigen::Index>(n_labels));
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t k = 0; k < n_labels; ++k) {
      const double v = user_ndcg[u][k];
      if (std::isnan(v)) continue;
      sums(home[u], static_cast<Eigen::Index>(k)) += v;
      panel.user_counts(home[u], static_cast<Eigen::Index>(k)) += 1;
    }
  }
  for (Eigen::Index d = 0; d < panel.mean_ndcg.rows(); ++d)
    for (Eigen::Index k = 0; k < panel.mean_ndcg.cols(); ++k)
      if (panel.user_counts(d, k) > 0) panel.mean_ndcg(d, k) = sums(d, k) / panel.user_counts(d, k);

  if (opts.keep_user_series) panel.user_ndcg = std::move(user_ndcg);
  return panel;
}

}  // namespace txa
