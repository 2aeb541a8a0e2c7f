#include "txa/shares.hpp"

#include <doctest.h>

#include <iterator>
#include <random>

using namespace txa;

namespace {

TransactionRow make(const char* client, const char* merchant, Day date, double amount, int mcc,
                    const char* district) {
  TransactionRow r;
  r.client = client;
  r.merchant = merchant;
  r.date = date;
  r.amount = amount;
  r.mcc = mcc;
  r.district = district;
  r.region = "r1";
  return r;
}

// independent re-aggregation straight from the rows
Vector brute_shares(const TransactionTable& t, const CoicopMapper& mapper, std::uint16_t district,
                    Day from, int w, ShareBasis basis, bool& empty) {
  Vector mass = Vector::Zero(kCategoryCount);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.district[i] != district || t.date[i] < from || t.date[i] >= from + w) continue;
    mass(mapper.map(t.mcc[i]) - 1) += basis == ShareBasis::Amount ? t.amount[i] : 1.0;
  }
  const double total = mass.sum();
  empty = total <= 0.0;
  return empty ? Vector::Zero(kCategoryCount).eval() : (mass / total).eval();
}

}  // namespace

TEST_CASE("hand-checked share vector") {
  const Day d0 = parse_date("2017-01-01");
  TransactionTable t;
  t.push(make("c1", "m1", d0, 30.0, 5411, "dA"));      // food
  t.push(make("c1", "m2", d0 + 1, 10.0, 5912, "dA"));  // health
  t.push(make("c2", "m3", d0 + 2, 60.0, 5411, "dA"));  // food
  t.push(make("c2", "m4", d0 + 1, 99.0, 5411, "dB"));  // other district
  t.push(make("c1", "m1", d0 + 9, 5.0, 5411, "dA"));   // outside the window

  const auto mapper = CoicopMapper::builtin();
  const auto sv = share_vector(t, mapper, "dA", d0, 7, ShareBasis::Amount);
  CHECK_FALSE(sv.empty);
  CHECK(sv.total == doctest::Approx(100.0));
  CHECK(sv.shares(0) == doctest::Approx(0.9));   // food 90/100
  CHECK(sv.shares(5) == doctest::Approx(0.1));   // health 10/100
  CHECK(sv.shares.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const auto counts = share_vector(t, mapper, "dA", d0, 7, ShareBasis::Count);
  CHECK(counts.shares(0) == doctest::Approx(2.0 / 3.0));
  CHECK(counts.shares(5) == doctest::Approx(1.0 / 3.0));
  CHECK(counts.total == doctest::Approx(3.0));

  CHECK_THROWS_AS(share_vector(t, mapper, "nowhere", d0, 7), Error);
}

TEST_CASE("empty windows are flagged, not fabricated") {
  const Day d0 = parse_date("2017-01-01");
  TransactionTable t;
  t.push(make("c1", "m1", d0, 10.0, 5411, "dA"));
  t.push(make("c1", "m1", d0 + 20, 10.0, 5411, "dA"));

  const SharePanel panel(t, CoicopMapper::builtin());
  const auto gap = panel.window(0, d0 + 7, 7);
  CHECK(gap.empty);
  CHECK(gap.shares.sum() == 0.0);
  CHECK(gap.total == 0.0);

  CHECK_THROWS_AS(panel.window(0, d0 - 1, 7), Error);
  CHECK_THROWS_AS(panel.window(0, d0 + 15, 7), Error);  // leaves the range
  CHECK_THROWS_AS(panel.window(9, d0, 7), Error);       // unknown district
}

TEST_CASE("panel windows match brute-force re-aggregation") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> day(0, 29);
  std::uniform_int_distribution<int> district(0, 2);
  std::uniform_real_distribution<double> amount(0.5, 80.0);
  const int mccs[] = {5411, 5912, 5541, 5812, 4111, 8220, 42};  // 42 -> default bucket
  std::uniform_int_distribution<std::size_t> pick(0, std::size(mccs) - 1);

  const Day d0 = parse_date("2017-06-01");
  TransactionTable t;
  const char* districts[] = {"dA", "dB", "dC"};
  for (int i = 0; i < 400; ++i)
    t.push(make("c1", "m1", d0 + day(rng), amount(rng), mccs[pick(rng)],
                districts[district(rng)]));

  const auto mapper = CoicopMapper::builtin();
  for (const auto basis : {ShareBasis::Amount, ShareBasis::Count}) {
    const SharePanel panel(t, mapper, basis);
    for (std::uint16_t d = 0; d < 3; ++d)
      for (Day start = d0; start + 7 <= d0 + 30; start += 3) {
        bool brute_empty = false;
        const Vector expect = brute_shares(t, mapper, d, start, 7, basis, brute_empty);
        const auto got = panel.window(d, start, 7);
        CHECK(got.empty == brute_empty);
        CHECK((got.shares - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("country reference is the whole-table mix") {
  const Day d0 = parse_date("2017-01-01");
  TransactionTable t;
  t.push(make("c1", "m1", d0, 75.0, 5411, "dA"));
  t.push(make("c2", "m2", d0 + 3, 25.0, 5912, "dB"));

  const SharePanel panel(t, CoicopMapper::builtin());
  const auto ref = panel.country_reference();
  CHECK(ref(0) == doctest::Approx(0.75));
  CHECK(ref(5) == doctest::Approx(0.25));
  CHECK(ref.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
