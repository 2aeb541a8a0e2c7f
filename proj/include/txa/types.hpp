#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace txa {

// ----- errors -----

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input schema (missing columns, wrong header).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// ----- calendar days -----

/// Days since 1970-01-01. All timestamps are day-resolved; an optional
/// intra-day seconds field keeps same-day orderings stable.
using Day = std::int32_t;

struct ParsedStamp {
  Day day = 0;
  std::uint32_t seconds = 0;  // 0 when the input carried a date only
};

Day parse_date(std::string_view text);                        // throws Error
ParsedStamp parse_timestamp(std::string_view text);           // ISO date or date'T'time
std::optional<ParsedStamp> try_parse_timestamp(std::string_view text);
std::string format_date(Day d);

/// Calendar month ordinal (year*12 + month-1); used for per-month totals.
int month_index(Day d);
int weekday(Day d);  // 0 = Monday ... 6 = Sunday
bool is_weekend(Day d);

// ----- string interning -----

/// Bidirectional id <-> dense index table. Indices are assigned in first-seen
/// order and are stable for the lifetime of the table.
class IdTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t idx) const { return names_.at(idx); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// ----- transaction table -----

struct TransactionRow {
  std::string client;
  std::string merchant;
  Day date = 0;
  std::uint32_t time_sec = 0;
  double amount = 0.0;
  int mcc = 0;
  std::string district;
  std::string region;
};

/// Column-oriented transaction store. Rows keep their append order; ordered
/// traversals go through the index helpers below.
class TransactionTable {
 public:
  std::vector<std::uint32_t> client;
  std::vector<std::uint32_t> merchant;
  std::vector<Day> date;
  std::vector<std::uint32_t> time_sec;
  std::vector<double> amount;
  std::vector<std::uint16_t> mcc;
  std::vector<std::uint16_t> district;
  std::vector<std::uint16_t> region;

  IdTable clients;
  IdTable merchants;
  IdTable districts;
  IdTable regions;

  std::size_t rows() const { return date.size(); }
  bool empty() const { return date.empty(); }

  void push(const TransactionRow& row);
  void reserve(std::size_t n);

  Day min_date() const;  // throws Error on empty table
  Day max_date() const;

  std::optional<std::uint16_t> find_district(std::string_view name) const;
  std::optional<std::uint32_t> find_client(std::string_view name) const;
  std::optional<std::uint32_t> find_merchant(std::string_view name) const;

  /// Row permutation grouped by client, ordered by (date, time, merchant,
  /// original row) within each client. This is the canonical purchase order.
  std::vector<std::uint32_t> order_by_client_time() const;

  /// Most frequent district per client (ties to the smaller district index).
  std::vector<std::uint16_t> client_home_district() const;

  /// Most frequent mcc per merchant (ties to the smaller mcc).
  std::vector<int> merchant_mode_mcc() const;
  /// Most frequent district per merchant (ties to the smaller index).
  std::vector<std::uint16_t> merchant_mode_district() const;
};

}  // namespace txa
