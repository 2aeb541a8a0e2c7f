#include "txa/demographics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace txa {

namespace {

struct ClientMonths {
  // month ordinal -> spend in that month
  std::map<int, double> months;
};

std::vector<ClientMonths> monthly_totals(const TransactionTable& table) {
  std::vector<ClientMonths> per_client(table.clients.size());
  for (std::size_t i = 0; i < table.rows(); ++i)
    per_client[table.client[i]].months[month_index(table.date[i])] += table.amount[i];
  return per_client;
}

std::optional<double> amp_of(const ClientMonths& cm, const AmpOptions& opts) {
  if (cm.months.empty()) return std::nullopt;
  double total = 0.0;
  bool clears = true;
  for (const auto& [m, spend] : cm.months) {
    total += spend;
    if (opts.mode == AmpOptions::Threshold::PerMonth && !(spend > opts.min_monthly))
      clears = false;
  }
  if (opts.mode == AmpOptions::Threshold::Total && !(total > opts.min_monthly)) clears = false;
  if (!clears) return std::nullopt;
  return total / static_cast<double>(cm.months.size());
}

}  // namespace

AmpResult compute_amp(const TransactionTable& table, const AmpOptions& opts) {
  const auto per_client = monthly_totals(table);
  AmpResult out;
  for (std::uint32_t c = 0; c < per_client.size(); ++c) {
    if (per_client[c].months.empty()) continue;  // never transacted
    if (auto amp = amp_of(per_client[c], opts)) {
      out.client.push_back(c);
      out.amp.push_back(*amp);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

std::optional<double> compute_amp(const TransactionTable& table, std::string_view client,
                                  const AmpOptions& opts) {
  const auto idx = table.find_client(client);
  if (!idx) return std::nullopt;
  const auto per_client = monthly_totals(table);
  return amp_of(per_client[*idx], opts);
}

std::vector<int> split_classes(const AmpResult& amp) {
  const std::size_t n = amp.amp.size();
  if (n < 9) throw Error("class split needs at least 9 clients, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (amp.amp[a] != amp.amp[b]) return amp.amp[a] < amp.amp[b];
    return amp.client[a] < amp.client[b];
  });

  double total = 0.0;
  for (double a : amp.amp) total += a;
  if (!(total > 0.0)) throw Error("class split needs positive total mass");

  // Client i joins the smallest class c with cum_i <= (c/9) * total, so equal
  // masses land one per class and heavy tails occupy the top cuts.
  std::vector<int> classes(n, 0);
  const double tol = 1e-12 * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cum += amp.amp[order[k]];
    int c = 1;
    while (c < 9 && cum * 9.0 > static_cast<double>(c) * total + tol) ++c;
    classes[order[k]] = c;
  }
  return classes;
}

double compute_gini(std::span<const double> values) {
  if (values.empty()) throw Error("gini of empty input");
  std::vector<double> v(values.begin(), values.end());
  double total = 0.0;
  for (double x : v) {
    if (x < 0.0) throw Error("gini requires non-negative values");
    total += x;
  }
  if (!(total > 0.0)) throw Error("gini undefined for all-zero input");
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * v[i];
  return acc / (n * total);
}

DemographicsSummary demographics(const TransactionTable& table, const AmpOptions& opts) {
  DemographicsSummary out;
  out.amp = compute_amp(table, opts);
  out.classes = split_classes(out.amp);
  out.gini = compute_gini(out.amp.amp);
  return out;
}

}  // namespace txa
