#include "txa/behavior.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace txa;

namespace {

void push(TransactionTable& t, const char* client, const char* merchant, Day date, int mcc,
          const char* district) {
  TransactionRow r;
  r.client = client;
  r.merchant = merchant;
  r.date = date;
  r.amount = 10.0;
  r.mcc = mcc;
  r.district = district;
  r.region = "r";
  t.push(r);
}

constexpr double kDcgHalfHalf = 0.6755532232;  // (2^0.5 - 1) * (1 + 1/log2 3)

}  // namespace

TEST_CASE("chain from an alternating visit sequence") {
  TransactionTable t;
  const Day d0 = parse_date("2017-01-01");
  const char* seq[] = {"mA", "mB", "mA", "mB"};
  for (int i = 0; i < 4; ++i) push(t, "u1", seq[i], d0 + i, 5411, "dA");

  const auto chain = build_chain(t, "u1", d0, 7);
  REQUIRE(chain.has_value());
  REQUIRE(chain->states.size() == 2);
  CHECK(chain->states[0] == *t.find_merchant("mA"));
  CHECK(chain->states[1] == *t.find_merchant("mB"));
  CHECK(chain->transition(0, 0) == 0.0);
  CHECK(chain->transition(0, 1) == 1.0);
  CHECK(chain->transition(1, 0) == 1.0);
  CHECK(chain->transition(1, 1) == 0.0);

  // periodic two-cycle still has a clean stationary vector via the lazy walk
  const Vector pi = stationary(chain->transition);
  CHECK(pi(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pi(1) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(!build_chain(t, "u1", d0 + 20, 7).has_value());  // empty window
  CHECK_THROWS_AS(build_chain(t, "nobody", d0, 7), Error);
}

TEST_CASE("dangling state gets a uniform row") {
  TransactionTable t;
  const Day d0 = parse_date("2017-01-01");
  push(t, "u1", "mA", d0, 5411, "dA");
  push(t, "u1", "mA", d0 + 1, 5411, "dA");
  push(t, "u1", "mB", d0 + 2, 5912, "dA");

  const auto chain = build_chain(t, "u1", d0, 7);
  REQUIRE(chain.has_value());
  CHECK(chain->transition(0, 0) == doctest::Approx(0.5));  // A -> {A, B} once each
  CHECK(chain->transition(0, 1) == doctest::Approx(0.5));
  CHECK(chain->transition(1, 0) == doctest::Approx(0.5));  // B never left: uniform
  CHECK(chain->transition(1, 1) == doctest::Approx(0.5));

  // single purchase -> no chain
  TransactionTable one;
  push(one, "u1", "mA", d0, 5411, "dA");
  CHECK(!build_chain(one, "u1", d0, 7).has_value());
}

TEST_CASE("stationary vector: frozen case, certificate, dense-solve oracle") {
  Matrix T(2, 2);
  T << 0.9, 0.1, 0.5, 0.5;
  const Vector pi = stationary(T);
  CHECK(pi(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  CHECK(pi(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));

  CHECK(stationary(Matrix::Identity(1, 1))(0) == 1.0);
  Matrix bad(2, 2);
  bad << 0.9, 0.2, 0.5, 0.5;
  CHECK_THROWS_AS(stationary(bad), Error);
  CHECK_THROWS_AS(stationary(Matrix::Zero(2, 3)), Error);

  std::mt19937_64 rng(7);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(trial % 5);
    Matrix M(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) M(r, c) = e(rng) + 1e-3;
      M.row(r) /= M.row(r).sum();
    }
    const Vector p = stationary(M);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
    CHECK(((p.transpose() * M).transpose() - p).lpNorm<Eigen::Infinity>() <= kStationaryCertTol);

    // oracle: null space of (T' - I) with the normalization row appended
    Matrix A = M.transpose() - Matrix::Identity(n, n);
    A.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    const Vector exact = A.colPivHouseholderQr().solve(b);
    CHECK((p - exact).lpNorm<Eigen::Infinity>() <= 1e-7);
  }
}

TEST_CASE("category relevance aggregates stationary mass with tie order") {
  const std::vector<std::uint32_t> states = {0, 1, 2};
  const std::vector<int> cat = {1, 6, 1};
  Vector pi(3);
  pi << 0.2, 0.5, 0.3;

  const auto rel = category_relevance(pi, states, cat);
  REQUIRE(rel.categories.size() == kCategoryCount);
  CHECK(rel.categories[0] == 1);  // tie at 0.5 broken by code
  CHECK(rel.categories[1] == 6);
  CHECK(rel.masses(0) == doctest::Approx(0.5));
  CHECK(rel.masses(1) == doctest::Approx(0.5));
  CHECK(rel.categories[2] == 2);  // zero-mass tail sorted by code
  CHECK(rel.categories.back() == 15);
  CHECK(rel.masses.sum() == doctest::Approx(1.0));

  Vector wrong(2);
  wrong << 0.5, 0.5;
  CHECK_THROWS_AS(category_relevance(wrong, states, cat), Error);
  const std::vector<int> bad_cat = {0, 6, 1};
  CHECK_THROWS_AS(category_relevance(pi, states, bad_cat), Error);
}

TEST_CASE("dcg and the week-over-week ratio") {
  Vector rel = Vector::Zero(15);
  rel(0) = 0.5;
  rel(1) = 0.5;
  CHECK(dcg(rel) == doctest::Approx(kDcgHalfHalf).epsilon(1e-9));
  CHECK(dcg(Vector::Zero(15)) == 0.0);
  Vector one = Vector::Zero(15);
  one(0) = 1.0;
  CHECK(dcg(one) == doctest::Approx(1.0));

  CHECK(*ndcg(0.5, 0.25) == doctest::Approx(2.0));
  CHECK(*ndcg(0.7, 0.7) == doctest::Approx(1.0));
  CHECK(!ndcg(0.5, 0.0).has_value());
  CHECK(!ndcg(0.5, -1.0).has_value());
}

TEST_CASE("weekly panel: labels, district means, per-user traces") {
  TransactionTable t;
  const Day d0 = parse_date("2017-06-01");
  // u1 (dA): alternating two-merchant loop all 14 days -> identical gain both
  // windows, ratio 1
  for (int i = 0; i < 14; ++i)
    push(t, "u1", i % 2 == 0 ? "mA" : "mB", d0 + i, i % 2 == 0 ? 5411 : 5912, "dA");
  // u3 (dA): first window single-category (gain 1), second window the
  // half/half mix (gain kDcgHalfHalf)
  push(t, "u3", "mA", d0, 5411, "dA");
  push(t, "u3", "mC", d0 + 2, 5411, "dA");
  push(t, "u3", "mA", d0 + 4, 5411, "dA");
  push(t, "u3", "mA", d0 + 7, 5411, "dA");
  push(t, "u3", "mB", d0 + 9, 5912, "dA");
  push(t, "u3", "mA", d0 + 11, 5411, "dA");
  push(t, "u3", "mB", d0 + 13, 5912, "dA");
  // u2 (dB): active in the first week only -> never has a ratio
  push(t, "u2", "mA", d0 + 1, 5411, "dB");
  push(t, "u2", "mB", d0 + 3, 5912, "dB");
  push(t, "u2", "mA", d0 + 5, 5411, "dB");

  BehaviorOptions opts;
  opts.window_days = 7;
  opts.step_days = 7;
  opts.keep_user_series = true;
  const auto panel = behavior_panel(t, CoicopMapper::builtin(), opts);

  REQUIRE(panel.labels.size() == 2);
  CHECK(panel.labels[0] == d0 + 7);
  CHECK(panel.labels[1] == d0 + 14);

  const auto dA = *t.find_district("dA");
  const auto dB = *t.find_district("dB");
  CHECK(std::isnan(panel.mean_ndcg(dA, 0)));  // no previous window yet
  CHECK(panel.user_counts(dA, 0) == 0);
  CHECK(panel.user_counts(dA, 1) == 2);
  CHECK(panel.mean_ndcg(dA, 1) == doctest::Approx((1.0 + kDcgHalfHalf) / 2.0).epsilon(1e-8));
  CHECK(panel.user_counts(dB, 1) == 0);
  CHECK(std::isnan(panel.mean_ndcg(dB, 1)));

  REQUIRE(panel.user_ndcg.size() == t.clients.size());
  const auto u1 = *t.find_client("u1");
  const auto u3 = *t.find_client("u3");
  const auto u2 = *t.find_client("u2");
  CHECK(panel.user_ndcg[u1][1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(panel.user_ndcg[u3][1] == doctest::Approx(kDcgHalfHalf).epsilon(1e-8));
  CHECK(std::isnan(panel.user_ndcg[u2][1]));
}

TEST_CASE("panel is identical across worker counts") {
  TransactionTable t;
  const Day d0 = parse_date("2017-06-01");
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> day(0, 41);
  std::uniform_int_distribution<int> pickm(0, 5);
  const char* merchants[] = {"m0", "m1", "m2", "m3", "m4", "m5"};
  const int mccs[] = {5411, 5912, 5541, 5812, 8220, 5411};
  for (int u = 0; u < 12; ++u) {
    const std::string client = "u" + std::to_string(u);
    const char* district = u % 3 == 0 ? "dA" : "dB";
    for (int i = 0; i < 30; ++i) {
      const int m = pickm(rng);
      push(t, client.c_str(), merchants[m], d0 + day(rng), mccs[m], district);
    }
  }

  BehaviorOptions one;
  one.workers = 1;
  BehaviorOptions four;
  four.workers = 4;
  const auto a = behavior_panel(t, CoicopMapper::builtin(), one);
  const auto b = behavior_panel(t, CoicopMapper::builtin(), four);
  REQUIRE(a.labels == b.labels);
  REQUIRE(a.mean_ndcg.rows() == b.mean_ndcg.rows());
  bool found_value = false;
  for (Eigen::Index d = 0; d < a.mean_ndcg.rows(); ++d) {
    for (Eigen::Index k = 0; k < a.mean_ndcg.cols(); ++k) {
      CHECK(a.user_counts(d, k) == b.user_counts(d, k));
      if (std::isnan(a.mean_ndcg(d, k))) {
        CHECK(std::isnan(b.mean_ndcg(d, k)));
      } else {
        CHECK(a.mean_ndcg(d, k) == b.mean_ndcg(d, k));
        found_value = true;
      }
    }
  }
  CHECK(found_value);
}
