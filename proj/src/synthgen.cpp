#include "txa/synthgen.hpp"

#include "txa/io.hpp"
#include "txa/parallel.hpp"
#include "txa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace txa {

namespace {

// Country-level category mix (sums to 1); districts tilt around it.
constexpr double kBaseMix[kCategoryCount] = {0.28, 0.02, 0.08, 0.06, 0.04, 0.09, 0.12, 0.05,
                                             0.05, 0.03, 0.10, 0.03, 0.03, 0.01, 0.01};

// Mean log-amount per category (currency units; food cheap, education dear).
constexpr double kLogAmount[kCategoryCount] = {2.8, 2.9, 3.6, 4.4, 3.8, 3.2, 3.0, 3.4,
                                               3.3, 4.2, 3.0, 4.0, 2.9, 3.1, 3.5};

constexpr int kWeekendCategories[] = {9, 11};  // recreation, restaurants

std::string district_name(int d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "d%02d", d);
  return buf;
}

std::string region_name(int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "r%d", r);
  return buf;
}

std::string merchant_name(int m) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m%05d", m);
  return buf;
}

std::string client_name(int c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%06d", c);
  return buf;
}

struct MerchantInfo {
  int category = 1;
  int mcc = 0;
  int district = 0;
  double popularity = 1.0;
};

struct GenRow {
  Day date;
  std::uint32_t agent;
  std::uint32_t seq;
  std::uint32_t merchant;
  double amount;
};

int sample_category(const double* prefs, double u) {
  double acc = 0.0;
  for (int c = 0; c < kCategoryCount; ++c) {
    acc += prefs[c];
    if (u <= acc) return c + 1;
  }
  return kCategoryCount;
}

}  // namespace

std::string_view to_string(ShockKind kind) {
  switch (kind) {
    case ShockKind::ConsumptionDrop: return "consumption-drop";
    case ShockKind::ConsumptionSurge: return "consumption-surge";
    case ShockKind::CategoryShift: return "category-shift";
    case ShockKind::EdgeThinning: return "edge-thinning";
  }
  return "consumption-drop";
}

ShockKind shock_kind_from(std::string_view name) {
  if (name == "consumption-drop") return ShockKind::ConsumptionDrop;
  if (name == "consumption-surge") return ShockKind::ConsumptionSurge;
  if (name == "category-shift") return ShockKind::CategoryShift;
  if (name == "edge-thinning") return ShockKind::EdgeThinning;
  throw ConfigError("unknown shock kind: " + std::string(name));
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  ScenarioConfig cfg;
  cfg.n_agents = static_cast<int>(kv.get_int("agents"));
  cfg.n_merchants = static_cast<int>(kv.get_int("merchants"));
  cfg.n_districts = static_cast<int>(kv.get_int("districts"));
  cfg.n_regions = static_cast<int>(kv.get_int_or("regions", std::max(1, cfg.n_districts / 8)));
  cfg.start_date = parse_date(kv.get("start"));
  cfg.end_date = parse_date(kv.get("end"));
  cfg.daily_rate = kv.get_double_or("daily_rate", cfg.daily_rate);
  cfg.rate_sigma = kv.get_double_or("rate_sigma", cfg.rate_sigma);
  cfg.rate_ramp = kv.get_double_or("rate_ramp", cfg.rate_ramp);
  cfg.weekend_boost = kv.get_double_or("weekend_boost", cfg.weekend_boost);
  cfg.weekend_tilt = kv.get_double_or("weekend_tilt", cfg.weekend_tilt);
  cfg.income_sigma = kv.get_double_or("income_sigma", cfg.income_sigma);
  cfg.amount_sigma = kv.get_double_or("amount_sigma", cfg.amount_sigma);
  cfg.pref_tilt = kv.get_double_or("pref_tilt", cfg.pref_tilt);
  cfg.merchants_per_category =
      static_cast<int>(kv.get_int_or("merchants_per_category", cfg.merchants_per_category));
  for (int i = 0;; ++i) {
    const std::string p = "shock." + std::to_string(i) + ".";
    if (!kv.has(p + "kind")) break;
    ShockSpec s;
    s.kind = shock_kind_from(kv.get(p + "kind"));
    s.magnitude = kv.get_double(p + "magnitude");
    if (kv.has(p + "districts")) s.districts = split_list(kv.get(p + "districts"));
    s.start = parse_date(kv.get(p + "start"));
    s.end = parse_date(kv.get(p + "end"));
    s.from_category = static_cast<int>(kv.get_int_or(p + "from", s.from_category));
    s.to_category = static_cast<int>(kv.get_int_or(p + "to", s.to_category));
    cfg.shocks.push_back(std::move(s));
  }
  cfg.validate();
  return cfg;
}

void ScenarioConfig::save(const std::filesystem::path& path) const {
  KeyValueFile kv;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  kv.set("agents", std::to_string(n_agents));
  kv.set("merchants", std::to_string(n_merchants));
  kv.set("districts", std::to_string(n_districts));
  kv.set("regions", std::to_string(n_regions));
  kv.set("start", format_date(start_date));
  kv.set("end", format_date(end_date));
  kv.set("daily_rate", num(daily_rate));
  kv.set("rate_sigma", num(rate_sigma));
  kv.set("rate_ramp", num(rate_ramp));
  kv.set("weekend_boost", num(weekend_boost));
  kv.set("weekend_tilt", num(weekend_tilt));
  kv.set("income_sigma", num(income_sigma));
  kv.set("amount_sigma", num(amount_sigma));
  kv.set("pref_tilt", num(pref_tilt));
  kv.set("merchants_per_category", std::to_string(merchants_per_category));
  for (std::size_t i = 0; i < shocks.size(); ++i) {
    const std::string p = "shock." + std::to_string(i) + ".";
    const auto& s = shocks[i];
    kv.set(p + "kind", std::string(to_string(s.kind)));
    kv.set(p + "magnitude", num(s.magnitude));
    std::string joined;
    for (const auto& d : s.districts) joined += (joined.empty() ? "" : ",") + d;
    kv.set(p + "districts", joined);
    kv.set(p + "start", format_date(s.start));
    kv.set(p + "end", format_date(s.end));
    kv.set(p + "from", std::to_string(s.from_category));
    kv.set(p + "to", std::to_string(s.to_category));
  }
  kv.save(path);
}

void ScenarioConfig::validate() const {
  if (n_agents < 1) throw ConfigError("scenario: agents must be >= 1");
  if (n_merchants < 1) throw ConfigError("scenario: merchants must be >= 1");
  if (n_districts < 1 || n_regions < 1) throw ConfigError("scenario: districts/regions >= 1");
  if (end_date < start_date) throw ConfigError("scenario: end before start");
  if (daily_rate <= 0.0) throw ConfigError("scenario: daily_rate must be positive");
  if (merchants_per_category < 1) throw ConfigError("scenario: merchants_per_category >= 1");
  for (const auto& s : shocks) {
    if (!(s.magnitude > 0.0 && s.magnitude <= 1.0))
      throw ConfigError("scenario: shock magnitude outside (0,1]");
    if (s.end < s.start) throw ConfigError("scenario: shock window inverted");
    if (s.from_category < 1 || s.from_category > kCategoryCount || s.to_category < 1 ||
        s.to_category > kCategoryCount)
      throw ConfigError("scenario: shock category out of range");
    for (const auto& name : s.districts) {
      bool known = false;
      for (int d = 0; d < n_districts; ++d)
        if (district_name(d) == name) known = true;
      if (!known) throw ConfigError("scenario: unknown district in shock: " + name);
    }
  }
}

TransactionTable generate(const ScenarioConfig& cfg, std::uint64_t seed, int workers) {
  cfg.validate();
  const auto mapper = CoicopMapper::builtin();

  // --- merchants: first 15 cover every category, the rest follow the mix ---
  std::vector<MerchantInfo> merchants(static_cast<std::size_t>(cfg.n_merchants));
  std::vector<std::vector<int>> by_cat(kCategoryCount + 1);          // global, popularity order
  std::vector<std::vector<std::vector<int>>> by_dist_cat(
      static_cast<std::size_t>(cfg.n_districts),
      std::vector<std::vector<int>>(kCategoryCount + 1));
  for (int m = 0; m < cfg.n_merchants; ++m) {
    std::mt19937_64 rng(derive_seed(seed, "merchant", static_cast<std::uint64_t>(m)));
    auto& info = merchants[static_cast<std::size_t>(m)];
    if (m < kCategoryCount) {
      info.category = m + 1;
    } else {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      info.category = sample_category(kBaseMix, u(rng));
    }
    const auto pool = mapper.mcc_pool(info.category);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    info.mcc = pool[pick(rng)];
    info.district = m % cfg.n_districts;
    // Zipf-like popularity by within-district rank.
    info.popularity = 1.0 / (1.0 + static_cast<double>(m / cfg.n_districts));
    by_cat[info.category].push_back(m);
    by_dist_cat[static_cast<std::size_t>(info.district)][info.category].push_back(m);
  }

  // --- district category preferences ---
  std::vector<std::array<double, kCategoryCount>> prefs(static_cast<std::size_t>(cfg.n_districts));
  for (int d = 0; d < cfg.n_districts; ++d) {
    std::mt19937_64 rng(derive_seed(seed, "district", static_cast<std::uint64_t>(d)));
    std::normal_distribution<double> z(0.0, 1.0);
    double total = 0.0;
    for (int c = 0; c < kCategoryCount; ++c) {
      prefs[d][c] = kBaseMix[c] * std::exp(cfg.pref_tilt * z(rng));
      total += prefs[d][c];
    }
    for (int c = 0; c < kCategoryCount; ++c) prefs[d][c] /= total;
  }

  // --- resolve shock district sets ---
  std::vector<std::vector<char>> shock_hits(cfg.shocks.size(),
                                            std::vector<char>(cfg.n_districts, 0));
  for (std::size_t s = 0; s < cfg.shocks.size(); ++s) {
    if (cfg.shocks[s].districts.empty()) {
      std::fill(shock_hits[s].begin(), shock_hits[s].end(), 1);
      continue;
    }
    for (const auto& name : cfg.shocks[s].districts)
      for (int d = 0; d < cfg.n_districts; ++d)
        if (district_name(d) == name) shock_hits[s][d] = 1;
  }

  const int n_days = cfg.end_date - cfg.start_date + 1;
  const double day_span = std::max(1, n_days - 1);

  // --- per-agent purchase streams ---
  std::vector<std::vector<GenRow>> buffers(static_cast<std::size_t>(cfg.n_agents));
  parallel_for(static_cast<std::size_t>(cfg.n_agents), workers, [&](std::size_t a) {
    std::mt19937_64 rng(derive_seed(seed, "agent", a));
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const int home = static_cast<int>(a) % cfg.n_districts;
    const double log_power = cfg.income_sigma * z(rng);
    const double rate_mult = std::exp(cfg.rate_sigma * z(rng) - 0.5 * cfg.rate_sigma * cfg.rate_sigma);

    // Merchant pool: per category, preferential picks from the home
    // district's merchants (global fallback), weighted by popularity.
    std::array<std::vector<int>, kCategoryCount + 1> pool;
    for (int c = 1; c <= kCategoryCount; ++c) {
      std::vector<int> candidates = by_dist_cat[static_cast<std::size_t>(home)][c];
      for (int m : by_cat[c])
        if (std::find(candidates.begin(), candidates.end(), m) == candidates.end())
          candidates.push_back(m);
      if (candidates.empty()) {
        // Tiny rosters may not reach every category; keep the scenario
        // generative by falling back to the whole roster.
        candidates.resize(merchants.size());
        std::iota(candidates.begin(), candidates.end(), 0);
      }
      const int want = std::min<int>(cfg.merchants_per_category,
                                     static_cast<int>(candidates.size()));
      for (int pick = 0; pick < want; ++pick) {
        double total = 0.0;
        for (int m : candidates) total += merchants[m].popularity;
        double target = u(rng) * total;
        std::size_t chosen = candidates.size() - 1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          target -= merchants[candidates[i]].popularity;
          if (target <= 0.0) {
            chosen = i;
            break;
          }
        }
        pool[c].push_back(candidates[chosen]);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(chosen));
      }
    }

    auto& rows = buffers[a];
    std::uint32_t seq = 0;
    for (Day day = cfg.start_date; day <= cfg.end_date; ++day) {
      double rate = cfg.daily_rate * rate_mult;
      if (is_weekend(day)) rate *= 1.0 + cfg.weekend_boost;
      rate *= 1.0 + cfg.rate_ramp * static_cast<double>(day - cfg.start_date) / day_span;

      double day_prefs[kCategoryCount];
      std::copy(prefs[home].begin(), prefs[home].end(), day_prefs);
      if (is_weekend(day)) {
        for (int c : kWeekendCategories) day_prefs[c - 1] *= 1.0 + cfg.weekend_tilt;
        double total = 0.0;
        for (double p : day_prefs) total += p;
        for (double& p : day_prefs) p /= total;
      }

      double pool_keep = 1.0;
      for (std::size_t s = 0; s < cfg.shocks.size(); ++s) {
        const auto& shock = cfg.shocks[s];
        if (!shock_hits[s][home] || day < shock.start || day > shock.end) continue;
        switch (shock.kind) {
          case ShockKind::ConsumptionDrop: rate *= 1.0 - shock.magnitude; break;
          case ShockKind::ConsumptionSurge: rate *= 1.0 + shock.magnitude; break;
          case ShockKind::CategoryShift: {
            const double moved = shock.magnitude * day_prefs[shock.from_category - 1];
            day_prefs[shock.from_category - 1] -= moved;
            day_prefs[shock.to_category - 1] += moved;
            break;
          }
          case ShockKind::EdgeThinning: pool_keep = std::min(pool_keep, 1.0 - shock.magnitude); break;
        }
      }

      int n_purchases = 0;
      if (rate > 0.0) {
        std::poisson_distribution<int> poisson(rate);
        n_purchases = poisson(rng);
      }
      for (int k = 0; k < n_purchases; ++k) {
        const int cat = sample_category(day_prefs, u(rng));
        const auto& candidates = pool[cat];
        auto usable = static_cast<std::size_t>(
            std::max(1.0, std::ceil(static_cast<double>(candidates.size()) * pool_keep)));
        usable = std::min(usable, candidates.size());
        std::uniform_int_distribution<std::size_t> pick(0, usable - 1);
        const int m = candidates[pick(rng)];
        const double amount =
            std::exp(kLogAmount[cat - 1] + log_power + cfg.amount_sigma * z(rng));
        rows.push_back({day, static_cast<std::uint32_t>(a), seq++, static_cast<std::uint32_t>(m),
                        std::round(amount * 100.0) / 100.0});
      }
    }
  });

  // --- canonical merge: (date, agent, sequence) ---
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  std::vector<const GenRow*> all;
  all.reserve(total);
  for (const auto& b : buffers)
    for (const auto& r : b) all.push_back(&r);
  std::sort(all.begin(), all.end(), [](const GenRow* x, const GenRow* y) {
    if (x->date != y->date) return x->date < y->date;
    if (x->agent != y->agent) return x->agent < y->agent;
    return x->seq < y->seq;
  });

  TransactionTable table;
  table.reserve(total);
  TransactionRow row;
  for (const GenRow* r : all) {
    const auto& info = merchants[r->merchant];
    row.client = client_name(static_cast<int>(r->agent));
    row.merchant = merchant_name(static_cast<int>(r->merchant));
    row.date = r->date;
    row.time_sec = 0;
    row.amount = r->amount;
    row.mcc = info.mcc;
    row.district = district_name(static_cast<int>(r->agent) % cfg.n_districts);
    row.region = region_name((static_cast<int>(r->agent) % cfg.n_districts) % cfg.n_regions);
    table.push(row);
  }
  return table;
}

TransactionTable inject_shock(const TransactionTable& table, const ShockSpec& spec,
                              std::uint64_t seed) {
  if (spec.kind == ShockKind::ConsumptionSurge || spec.kind == ShockKind::EdgeThinning)
    throw std::invalid_argument("inject_shock: " + std::string(to_string(spec.kind)) +
                                " only exists at generation time");
  if (!(spec.magnitude > 0.0 && spec.magnitude <= 1.0))
    throw Error("inject_shock: magnitude outside (0,1]");

  std::vector<char> affected(table.districts.size(), 0);
  if (spec.districts.empty()) {
    std::fill(affected.begin(), affected.end(), 1);
  } else {
    for (const auto& name : spec.districts) {
      const auto idx = table.find_district(name);
      if (!idx) throw Error("inject_shock: unknown district: " + name);
      affected[*idx] = 1;
    }
  }

  const auto mapper = CoicopMapper::builtin();
  std::mt19937_64 rng(derive_seed(seed, "inject"));
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Destination candidates for CategoryShift, grouped by district.
  std::vector<int> dest_global;
  std::vector<std::vector<int>> dest_by_district(table.districts.size());
  std::vector<int> merchant_cat;
  std::vector<int> merchant_mcc;
  std::vector<std::uint16_t> merchant_dist;
  if (spec.kind == ShockKind::CategoryShift) {
    merchant_mcc = table.merchant_mode_mcc();
    merchant_dist = table.merchant_mode_district();
    merchant_cat.resize(merchant_mcc.size());
    for (std::size_t m = 0; m < merchant_mcc.size(); ++m) {
      merchant_cat[m] = mapper.map(merchant_mcc[m]);
      if (merchant_cat[m] == spec.to_category) {
        dest_global.push_back(static_cast<int>(m));
        dest_by_district[merchant_dist[m]].push_back(static_cast<int>(m));
      }
    }
    if (dest_global.empty())
      throw Error("inject_shock: no merchant carries the destination category");
  }

  TransactionTable out;
  out.reserve(table.rows());
  TransactionRow row;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const bool in_scope = affected[table.district[i]] && table.date[i] >= spec.start &&
                          table.date[i] <= spec.end;
    row.client = table.clients.name(table.client[i]);
    row.merchant = table.merchants.name(table.merchant[i]);
    row.date = table.date[i];
    row.time_sec = table.time_sec[i];
    row.amount = table.amount[i];
    row.mcc = table.mcc[i];
    row.district = table.districts.name(table.district[i]);
    row.region = table.regions.name(table.region[i]);

    if (in_scope && spec.kind == ShockKind::ConsumptionDrop) {
      if (u(rng) < spec.magnitude) continue;  // dropped
    } else if (in_scope && spec.kind == ShockKind::CategoryShift &&
               mapper.map(table.mcc[i]) == spec.from_category && u(rng) < spec.magnitude) {
      const auto& local = dest_by_district[table.district[i]];
      const auto& cands = local.empty() ? dest_global : local;
      std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
      const int m = cands[pick(rng)];
      row.merchant = table.merchants.name(static_cast<std::uint32_t>(m));
      row.mcc = merchant_mcc[m];
    }
    out.push(row);
  }
  return out;
}

}  // namespace txa
