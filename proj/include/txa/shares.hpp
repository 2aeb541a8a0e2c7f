#pragma once

#include "txa/coicop.hpp"
#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <vector>

namespace txa {

enum class ShareBasis { Amount, Count };

/// Category mix of one (district, window) cell. `shares` has kCategoryCount
/// components summing to 1 unless the window held no mass, in which case
/// `empty` is set and the vector is all zero.
struct ShareVector {
  std::uint16_t district = 0;
  Day window_start = 0;
  int window_days = 0;
  Vector shares;
  double total = 0.0;  // raw mass (amount or count) inside the window
  bool empty = true;
};

/// Daily per-district category masses with prefix sums, so any [t, t+w)
/// window share vector is an O(kCategoryCount) slice. Windows are labeled by
/// their start day and cover w consecutive days.
class SharePanel {
 public:
  SharePanel(const TransactionTable& table, const CoicopMapper& mapper,
             ShareBasis basis = ShareBasis::Amount);

  Day start() const { return start_; }
  Day end() const { return start_ + n_days_; }  // one past the last day
  int n_days() const { return n_days_; }
  std::size_t n_districts() const { return prefix_.size(); }
  ShareBasis basis() const { return basis_; }

  /// Share vector for district over [t, t+w). Throws on unknown district or
  /// a window that leaves the panel's date range.
  ShareVector window(std::uint16_t district, Day t, int w) const;

  /// Whole-population category mix over the full span (the reference mix).
  Vector country_reference() const;

  /// Raw per-category mass for district over [t, t+w) (no normalization).
  Vector window_mass(std::uint16_t district, Day t, int w) const;

 private:
  Day start_ = 0;
  int n_days_ = 0;
  ShareBasis basis_ = ShareBasis::Amount;
  // prefix_[d] is (n_days+1) x kCategoryCount; row r = mass summed over days
  // [start, start+r).
  std::vector<Matrix> prefix_;
  Vector country_total_;
};

/// One-off share vector; routes through a panel so the arithmetic is shared
/// with the sliding-window pipelines.
ShareVector share_vector(const TransactionTable& table, const CoicopMapper& mapper,
                         std::string_view district, Day window_start, int window_days,
                         ShareBasis basis = ShareBasis::Amount);

}  // namespace txa
