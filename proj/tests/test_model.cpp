#include <doctest.h>

#include "lpexit/model.hpp"

using namespace lpexit;

namespace {
PoolConfig pool() { return PoolConfig::from_reserves(1000.0, 1000.0, 1.0, 500.0, 1500.0); }
}  // namespace

TEST_CASE("level curve and marginal price") {
  const PoolConfig p = pool();
  CHECK(p.depth_c == 1e6);
  CHECK(level_curve(p, 1000.0) == doctest::Approx(1000.0));
  CHECK(marginal_price(p, 1000.0) == doctest::Approx(1.0));
  CHECK(marginal_price(p, 500.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(level_curve(p, 0.0), std::domain_error);
}

TEST_CASE("pool validation rejects bad geometry") {
  CHECK_THROWS_AS(PoolConfig::from_reserves(1000, 1000, 1, 1500, 500), std::invalid_argument);
  CHECK_THROWS_AS(PoolConfig::from_reserves(1000, 1000, 0, 500, 1500), std::invalid_argument);
  CHECK_THROWS_AS(PoolConfig::from_reserves(1000, 1000.5, 1, 500, 1500), std::invalid_argument);
  CHECK_THROWS_AS(PoolConfig::from_reserves(1000, 2000, 1, 500, 1500), std::invalid_argument);
  CHECK_THROWS_AS(PoolConfig::from_reserves(-1, 1000, 1, 500, 1500), std::invalid_argument);
}

TEST_CASE("lattice addressing is exact") {
  const PoolConfig p = pool();
  CHECK(p.lattice_size() == 1001);
  CHECK(p.lattice_index(500.0) == 0);
  CHECK(p.lattice_index(1500.0) == 1000);
  CHECK(p.lattice_value(p.y0_index()) == 1000.0);
  CHECK_THROWS_AS(p.lattice_index(1000.5), std::domain_error);
  CHECK_THROWS_AS(p.lattice_index(1501.0), std::domain_error);
  CHECK(admissible_buy(p, 1499.0));
  CHECK_FALSE(admissible_buy(p, 1500.0));
  CHECK_FALSE(admissible_sell(p, 500.0));

  const PoolConfig q = p.recentred(900.0);
  CHECK(q.y0 == 900.0);
  CHECK(q.x0 * q.y0 == doctest::Approx(p.depth_c));
}

TEST_CASE("trade payoffs by hand") {
  const PoolConfig p = pool();
  const FeeSchedule fee = FeeSchedule::constant(10.0);
  // c/(1001) - c/1000 + 1 * S + 10 at S = 1
  CHECK(beta_buy(p, fee, 1000.0, 1.0) == doctest::Approx(1e6 / 1001.0 - 1000.0 + 1.0 + 10.0));
  CHECK(beta_sell(p, fee, 1000.0, 1.0) == doctest::Approx(1e6 / 999.0 - 1000.0 - 1.0 + 10.0));
  // Without fees and at S = Z the taker still pays the curvature c xi^2 / (y^2 (y +- xi)).
  const FeeSchedule none = FeeSchedule::constant(0.0);
  CHECK(beta_buy(p, none, 1000.0, 1.0) == doctest::Approx(1e6 / (1e6 * 1001.0)));
  CHECK(beta_sell(p, none, 1000.0, 1.0) == doctest::Approx(1e6 / (1e6 * 999.0)));

  const FeeSchedule lin = FeeSchedule::linear(1.0, 0.01);
  CHECK(lin(1000.0) == doctest::Approx(11.0));
  CHECK(lin.scaled(2.0)(1000.0) == doctest::Approx(22.0));
  CHECK_THROWS_AS(FeeSchedule::constant(-1.0).validate(), std::invalid_argument);
}

TEST_CASE("round trip earns exactly the two fees") {
  const PoolConfig p = pool();
  const FeeSchedule fee = FeeSchedule::linear(3.0, 0.25);
  for (double s : {0.5, 1.0, 2.0}) {
    PoolState st = initial_state(p, s);
    const PoolState start = st;
    REQUIRE(apply_buy(st, p, fee));
    REQUIRE(apply_sell(st, p, fee));
    CHECK(st.x == start.x);
    CHECK(st.y == start.y);
    CHECK(st.fees_accrued_R == fee(1000.0) + fee(1001.0));
    CHECK(impermanent_loss(st) == impermanent_loss(start));
    // The payoff increments telescope to the same total.
    const double sum = beta_buy(p, fee, 1000.0, s) + beta_sell(p, fee, 1001.0, s);
    CHECK(sum == doctest::Approx(fee(1000.0) + fee(1001.0)).epsilon(1e-12));
  }
}

TEST_CASE("trades stop at the reserve bounds") {
  const PoolConfig p = PoolConfig::from_reserves(100.0, 10.0, 1.0, 9.0, 10.0);
  const FeeSchedule fee = FeeSchedule::constant(1.0);
  PoolState st = initial_state(p, 1.0);
  CHECK_FALSE(apply_buy(st, p, fee));
  CHECK(st.fees_accrued_R == 0.0);
  CHECK(apply_sell(st, p, fee));
  CHECK_FALSE(apply_sell(st, p, fee));
  CHECK(st.y == 9.0);
  CHECK(st.x * st.y == doctest::Approx(p.depth_c));
}

TEST_CASE("impermanent loss by hand") {
  const PoolConfig p = pool();
  PoolState st = initial_state(p, 2.0);
  CHECK(impermanent_loss(st) == 0.0);
  apply_buy(st, p, FeeSchedule::constant(0.0));
  // -( (c/1001 - 1000) + 2 * 1 )
  CHECK(impermanent_loss(st) == doctest::Approx(-(1e6 / 1001.0 - 1000.0 + 2.0)));
}

TEST_CASE("intensities respect the floor") {
  const PoolConfig p = pool();
  const MarketParams mp{100.0, 1.0, 4.0, 8.0, 0.04, 1.0};
  for (double y : {500.0, 1000.0, 1500.0})
    for (double s : {-1000.0, 0.0, 1.0, 1000.0}) {
      CHECK(intensity_buy(mp, p, y, s) >= mp.a0);
      CHECK(intensity_sell(mp, p, y, s) >= mp.a0);
    }
  CHECK(intensity_buy(mp, p, 1000.0, 1.0) == doctest::Approx(8.0));
  CHECK(intensity_sell(mp, p, 1000.0, 101.0) == doctest::Approx(12.0));
  CHECK(intensity_buy(mp, p, 1000.0, 1001.0) == doctest::Approx(4.0));
  MarketParams bad = mp;
  bad.a0 = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
