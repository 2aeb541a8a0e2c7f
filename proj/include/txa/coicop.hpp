#pragma once

#include "txa/types.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace txa {

/// Fixed 15-way consumption category space. Codes are 1-based (01..15);
/// vector/matrix layouts use the 0-based index = code - 1.
inline constexpr int kCategoryCount = 15;

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "food_non_alcoholic",      // 01
    "alcohol_tobacco",         // 02
    "clothing_footwear",       // 03
    "housing_utilities",       // 04
    "furnishings_household",   // 05
    "health",                  // 06
    "transport",               // 07
    "information_comm",        // 08
    "recreation_culture",      // 09
    "education",               // 10
    "restaurants_accomm",      // 11
    "insurance_financial",     // 12
    "personal_care_misc",      // 13
    "non_profit",              // 14
    "government",              // 15
};

inline constexpr int kDefaultCategory = 13;  // personal care & miscellaneous

/// Total, deterministic mcc -> category map. Unmapped codes resolve to the
/// configured default and bump a warning counter. The shipped table is an
/// editable two-column text file ("mcc,coicop" with a header).
class CoicopMapper {
 public:
  /// Compiled-in default table (same rows the shipped data file carries).
  static CoicopMapper builtin(int default_category = kDefaultCategory);
  static CoicopMapper load(const std::filesystem::path& path,
                           int default_category = kDefaultCategory);

  CoicopMapper() = default;
  // The atomic warning counter would otherwise delete these.
  CoicopMapper(const CoicopMapper& other)
      : table_(other.table_), default_(other.default_), unmapped_(other.unmapped_.load()) {}
  CoicopMapper& operator=(const CoicopMapper& other) {
    table_ = other.table_;
    default_ = other.default_;
    unmapped_.store(other.unmapped_.load());
    return *this;
  }

  /// Category code (1..15) for an mcc in 0..9999.
  int map(int mcc) const;

  std::uint64_t unmapped_count() const { return unmapped_.load(); }
  void reset_unmapped_count() { unmapped_.store(0); }
  int default_category() const { return default_; }
  std::size_t table_size() const { return table_.size(); }

  /// Writes the table in the editable on-disk format.
  void save(const std::filesystem::path& path) const;

  /// mcc codes assigned to a category (sorted); used by the generator to give
  /// merchants concrete mcc values.
  std::vector<int> mcc_pool(int category) const;

 private:
  std::unordered_map<int, int> table_;
  int default_ = kDefaultCategory;
  mutable std::atomic<std::uint64_t> unmapped_{0};
};

/// Per-merchant category derived from each merchant's modal mcc.
std::vector<int> merchant_categories(const TransactionTable& table, const CoicopMapper& mapper);

}  // namespace txa
