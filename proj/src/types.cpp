#include "txa/types.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <numeric>

namespace txa {

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

std::optional<ParsedStamp> try_parse_timestamp(std::string_view text) {
  // YYYY-MM-DD with optional 'T'HH:MM:SS tail.
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  ParsedStamp out;
  out.day = static_cast<Day>(std::chrono::sys_days{ymd}.time_since_epoch().count());
  if (text.size() == 10) return out;
  if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
      text[16] != ':')
    return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
      !parse_int(text.substr(17, 2), ss))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  out.seconds = static_cast<std::uint32_t>(hh * 3600 + mm * 60 + ss);
  return out;
}

ParsedStamp parse_timestamp(std::string_view text) {
  auto p = try_parse_timestamp(text);
  if (!p) throw Error("unparseable timestamp: '" + std::string(text) + "'");
  return *p;
}

Day parse_date(std::string_view text) { return parse_timestamp(text).day; }

std::string format_date(Day d) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{d}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

int month_index(Day d) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{d}}};
  return int(ymd.year()) * 12 + int(unsigned(ymd.month())) - 1;
}

int weekday(Day d) {
  // 1970-01-01 was a Thursday (= 3 with Monday as 0).
  return static_cast<int>(((d % 7) + 7 + 3) % 7);
}

bool is_weekend(Day d) { return weekday(d) >= 5; }

std::uint32_t IdTable::intern(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  const auto idx = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), idx);
  return idx;
}

std::optional<std::uint32_t> IdTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TransactionTable::push(const TransactionRow& row) {
  client.push_back(clients.intern(row.client));
  merchant.push_back(merchants.intern(row.merchant));
  date.push_back(row.date);
  time_sec.push_back(row.time_sec);
  amount.push_back(row.amount);
  mcc.push_back(static_cast<std::uint16_t>(row.mcc));
  district.push_back(static_cast<std::uint16_t>(districts.intern(row.district)));
  region.push_back(static_cast<std::uint16_t>(regions.intern(row.region)));
}

void TransactionTable::reserve(std::size_t n) {
  client.reserve(n);
  merchant.reserve(n);
  date.reserve(n);
  time_sec.reserve(n);
  amount.reserve(n);
  mcc.reserve(n);
  district.reserve(n);
  region.reserve(n);
}

Day TransactionTable::min_date() const {
  if (empty()) throw Error("transaction table is empty");
  return *std::min_element(date.begin(), date.end());
}

Day TransactionTable::max_date() const {
  if (empty()) throw Error("transaction table is empty");
  return *std::max_element(date.begin(), date.end());
}

std::optional<std::uint16_t> TransactionTable::find_district(std::string_view name) const {
  auto idx = districts.find(name);
  if (!idx) return std::nullopt;
  return static_cast<std::uint16_t>(*idx);
}

std::optional<std::uint32_t> TransactionTable::find_client(std::string_view name) const {
  return clients.find(name);
}

std::optional<std::uint32_t> TransactionTable::find_merchant(std::string_view name) const {
  return merchants.find(name);
}

std::vector<std::uint32_t> TransactionTable::order_by_client_time() const {
  std::vector<std::uint32_t> order(rows());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
    if (client[a] != client[b]) return client[a] < client[b];
    if (date[a] != date[b]) return date[a] < date[b];
    if (time_sec[a] != time_sec[b]) return time_sec[a] < time_sec[b];
    if (merchant[a] != merchant[b]) return merchant[a] < merchant[b];
    return a < b;
  });
  return order;
}

namespace {

// Mode per group; ties resolved toward the smaller value.
template <typename Key, typename Val>
std::vector<Val> group_mode(std::size_t n_groups, const std::vector<Key>& group,
                            const std::vector<Val>& value) {
  std::vector<std::unordered_map<Val, std::uint32_t>> counts(n_groups);
  for (std::size_t i = 0; i < group.size(); ++i) ++counts[group[i]][value[i]];
  std::vector<Val> out(n_groups, Val{});
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::uint32_t best = 0;
    Val best_val{};
    bool seen = false;
    for (const auto& [val, cnt] : counts[g]) {
      if (!seen || cnt > best || (cnt == best && val < best_val)) {
        best = cnt;
        best_val = val;
        seen = true;
      }
    }
    out[g] = best_val;
  }
  return out;
}

}  // namespace

std::vector<std::uint16_t> TransactionTable::client_home_district() const {
  return group_mode(clients.size(), client, district);
}

std::vector<int> TransactionTable::merchant_mode_mcc() const {
  std::vector<int> mcc_int(mcc.begin(), mcc.end());
  return group_mode(merchants.size(), merchant, mcc_int);
}

std::vector<std::uint16_t> TransactionTable::merchant_mode_district() const {
  return group_mode(merchants.size(), merchant, district);
}

}  // namespace txa
