#pragma once

#include "txa/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace txa {

// ----- ingest -----

/// Maps logical column roles to header names in the input file. Defaults
/// match the canonical export schema.
struct ColumnMap {
  std::string client = "client_id";
  std::string merchant = "merchant_id";
  std::string date = "date";
  std::string amount = "amount";
  std::string mcc = "mcc";
  std::string district = "district_id";
  std::string region = "region_id";  // optional column
};

struct RejectedRow {
  std::uint64_t line = 0;  // 1-based physical line in the input
  std::string reason;
};

struct IngestResult {
  TransactionTable table;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::vector<RejectedRow> reject_sample;  // first kRejectSampleCap offenders
  static constexpr std::size_t kRejectSampleCap = 50;
};

/// Reads a delimited transaction file. Rows with unparseable timestamps or
/// amounts, negative amounts, or out-of-range mcc values are counted and
/// skipped; a missing mandatory column raises SchemaError.
IngestResult ingest_transactions(const std::filesystem::path& path,
                                 const ColumnMap& columns = {});
IngestResult ingest_transactions(std::istream& in, const ColumnMap& columns = {});

/// Serializes a table back to the canonical schema (used by the generator
/// and the pipeline). Row order is the table's storage order.
void write_transactions(std::ostream& out, const TransactionTable& table);
void write_transactions(const std::filesystem::path& path, const TransactionTable& table);

// ----- atomic output -----

/// Collects output in memory and renames a temp file over the target on
/// commit(), so the target path never holds a partially written file.
/// A writer destroyed without commit() leaves the filesystem untouched.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::filesystem::path target);
  ~AtomicWriter();
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  std::string& buffer() { return buffer_; }
  void append(std::string_view text) { buffer_ += text; }
  void commit();

 private:
  std::filesystem::path target_;
  std::string buffer_;
  bool committed_ = false;
};

/// FNV-1a content hash of a file, rendered as 16 hex digits.
std::string hash_file(const std::filesystem::path& path);

// ----- flat key=value config files -----

/// Minimal `key = value` config format: one pair per line, '#' comments,
/// blank lines ignored. Duplicate keys keep the last value.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::filesystem::path& path);  // throws ConfigError
  static KeyValueFile parse(std::istream& in);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws ConfigError when absent
  std::string get_or(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;

  /// Keys with the given prefix, in file order (first occurrence).
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void set(const std::string& key, std::string value);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::string> values_;
};

/// Splits a comma-separated list, trimming surrounding whitespace.
std::vector<std::string> split_list(std::string_view text);

}  // namespace txa
