#include "txa/shares.hpp"

namespace txa {

SharePanel::SharePanel(const TransactionTable& table, const CoicopMapper& mapper,
                       ShareBasis basis)
    : basis_(basis) {
  if (table.empty()) throw Error("share panel over empty table");
  start_ = table.min_date();
  n_days_ = static_cast<int>(table.max_date() - start_) + 1;

  const auto n_districts = table.districts.size();
  std::vector<Matrix> daily(n_districts, Matrix::Zero(n_days_, kCategoryCount));
  country_total_ = Vector::Zero(kCategoryCount);

  for (std::size_t i = 0; i < table.rows(); ++i) {
    const int cat = mapper.map(table.mcc[i]) - 1;
    const double mass = basis == ShareBasis::Amount ? table.amount[i] : 1.0;
    daily[table.district[i]](table.date[i] - start_, cat) += mass;
    country_total_(cat) += mass;
  }

  prefix_.reserve(n_districts);
  for (auto& m : daily) {
    Matrix p = Matrix::Zero(n_days_ + 1, kCategoryCount);
    for (int r = 0; r < n_days_; ++r) p.row(r + 1) = p.row(r) + m.row(r);
    prefix_.push_back(std::move(p));
  }
}

Vector SharePanel::window_mass(std::uint16_t district, Day t, int w) const {
  if (district >= prefix_.size()) throw Error("unknown district index");
  if (w <= 0) throw Error("window length must be positive");
  if (t < start_ || t + w > end())
    throw Error("window [" + format_date(t) + ", +" + std::to_string(w) +
                "d) leaves the panel range");
  const auto& p = prefix_[district];
  return (p.row(t - start_ + w) - p.row(t - start_)).transpose();
}

ShareVector SharePanel::window(std::uint16_t district, Day t, int w) const {
  ShareVector sv;
  sv.district = district;
  sv.window_start = t;
  sv.window_days = w;
  Vector mass = window_mass(district, t, w);
  sv.total = mass.sum();
  if (sv.total <= 0.0) {
    sv.shares = Vector::Zero(kCategoryCount);
    sv.empty = true;
  } else {
    sv.shares = mass / sv.total;
    sv.empty = false;
  }
  return sv;
}

Vector SharePanel::country_reference() const {
  const double total = country_total_.sum();
  if (total <= 0.0) throw Error("panel holds no mass");
  return country_total_ / total;
}

ShareVector share_vector(const TransactionTable& table, const CoicopMapper& mapper,
                         std::string_view district, Day window_start, int window_days,
                         ShareBasis basis) {
  const auto idx = table.find_district(district);
  if (!idx) throw Error("unknown district: " + std::string(district));
  SharePanel panel(table, mapper, basis);
  return panel.window(*idx, window_start, window_days);
}

}  // namespace txa
