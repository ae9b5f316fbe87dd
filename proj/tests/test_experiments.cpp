#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "lpexit/experiments.hpp"

using namespace lpexit;

TEST_CASE("multiplier labels") {
  CHECK(multiplier_label(OverrideTarget::sigma, 1.0) == "sigma");
  CHECK(multiplier_label(OverrideTarget::sigma, 0.2) == "sigma/5");
  CHECK(multiplier_label(OverrideTarget::sigma, 1.0 / 3.0) == "sigma/3");
  CHECK(multiplier_label(OverrideTarget::a2, 3.0) == "3 a2");
  CHECK(multiplier_label(OverrideTarget::fee, 1.5) == "1.5 fee");
  CHECK(parse_override_target("a1") == OverrideTarget::a1);
  CHECK_THROWS_AS(parse_override_target("rho"), std::invalid_argument);
}

TEST_CASE("scenarios apply their multiplier to one parameter") {
  const ModelSetup base = fixture::small_setup();
  const auto sc = multiplier_scenarios(base, OverrideTarget::a2, {0.5, 2.0});
  REQUIRE(sc.size() == 2u);
  CHECK(sc[1].applied().market.a2 == doctest::Approx(2 * base.market.a2));
  CHECK(sc[1].applied().market.sigma == base.market.sigma);
  const Scenario zero_fee{"no fee", base, OverrideTarget::fee, 0.0};
  CHECK(zero_fee.applied().fee(1000.0) == 0.0);
  const Scenario zero_sigma{"flat", base, OverrideTarget::sigma, 0.0};
  CHECK_THROWS_AS(zero_sigma.applied(), std::invalid_argument);
}

TEST_CASE("sweep rows carry statistics, seeds and per-row errors") {
  const ModelSetup base = fixture::small_setup(400, 40);
  auto scenarios = multiplier_scenarios(base, OverrideTarget::sigma, {0.5, 1.0, 2.0});
  scenarios.push_back({"broken", base, OverrideTarget::sigma, -1.0});
  const SweepReport common = run_sweep(scenarios, SeedPolicy::common);
  REQUIRE(common.rows.size() == 4u);
  for (int k = 0; k < 3; ++k) {
    const SweepRow& r = common.rows[k];
    CHECK(r.ok());
    CHECK(r.seed == base.sim.seed);
    CHECK(r.mean_perf == doctest::Approx(r.mean_R - r.mean_IL));
    CHECK(r.mean_perf + 3 * r.se_perf() >= 0.0);
  }
  CHECK_FALSE(common.rows[3].ok());

  const SweepReport indep = run_sweep(scenarios, SeedPolicy::independent);
  CHECK(indep.rows[0].seed != indep.rows[1].seed);
  CHECK(indep.rows[0].seed == derive_seed(base.sim.seed, 0));

  std::ostringstream table, csv;
  render_sweep_table(table, common, "demo");
  write_sweep_csv(csv, common);
  CHECK(table.str().find("2 sigma") != std::string::npos);
  CHECK(csv.str().find("broken") != std::string::npos);
}

TEST_CASE("sweeps are reproducible") {
  const ModelSetup base = fixture::small_setup(300, 30);
  const auto sc = multiplier_scenarios(base, OverrideTarget::a1, {1.0, 2.0});
  const SweepReport a = run_sweep(sc);
  const SweepReport b = run_sweep(sc);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].mean_perf == b.rows[k].mean_perf);
    CHECK(a.rows[k].std_IL == b.rows[k].std_IL);
  }
}

TEST_CASE("performance rises with the fee multiplier") {
  const ModelSetup base = fixture::small_setup(1000, 50);
  const auto curve = performance_curve(base, {0.0, 1.0, 2.0});
  REQUIRE(curve.size() == 3u);
  CHECK(curve[0].multiplier == 0.0);
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k].mean_perf > curve[k - 1].mean_perf);
  CHECK_THROWS_AS(performance_curve(base, {-1.0}), std::invalid_argument);
}

TEST_CASE("exit scatter lists every path") {
  const ModelSetup base = fixture::small_setup(300, 30);
  const PathBundle b = simulate(base.pool, base.market, base.fee, base.sim);
  const LsmcResult r = backward_induct(b, base.lsmc);
  const auto pts = exit_scatter(b, r);
  REQUIRE(pts.size() == 300u);
  CHECK(pts[7].tau == r.exit_times(7));
  CHECK(pts[7].perf_tau == doctest::Approx(b.perf(7, r.exit_index(7))));
}
