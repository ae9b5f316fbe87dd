#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "lpexit/lsmc.hpp"
#include "oracles.hpp"

using namespace lpexit;

TEST_CASE("basis is ordered by total degree") {
  const Eigen::VectorXd b = build_basis(2.0, 3.0, 2);
  REQUIRE(b.size() == 6);
  CHECK(b(0) == 1.0);
  CHECK(b(1) == 2.0);
  CHECK(b(2) == 3.0);
  CHECK(b(3) == 4.0);
  CHECK(b(4) == 6.0);
  CHECK(b(5) == 9.0);
  CHECK(LsmcConfig{}.n_features() == 10);

  Eigen::VectorXd s(2), y(2);
  s << 2.0, 4.0;
  y << 3.0, 5.0;
  const Standardization st{1.0, 2.0, 1.0, 4.0};
  const Eigen::MatrixXd m = basis_matrix(s, y, 2, st);
  CHECK(m.row(0).transpose().isApprox(build_basis(0.5, 0.5, 2)));
  CHECK(m.row(1).transpose().isApprox(build_basis(1.5, 1.0, 2)));
}

TEST_CASE("ordinary least squares recovers coefficients within three standard errors") {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> n01;
  const int rows = 4000;
  const double noise = 0.7;
  Eigen::MatrixXd x(rows, 3);
  Eigen::VectorXd truth(3), t(rows);
  truth << 1.5, -2.0, 0.25;
  for (int i = 0; i < rows; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = n01(eng);
    x(i, 2) = n01(eng) * 3.0 + 1.0;
    t(i) = x.row(i).dot(truth) + noise * n01(eng);
  }
  const RegressionFit fit = regress(x, t);
  CHECK(fit.rank == 3);
  CHECK_FALSE(fit.rank_deficient);
  const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * noise * noise;
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(fit.coefficients(k) - truth(k)) < 3.0 * std::sqrt(cov(k, k)));
}

TEST_CASE("rank-deficient design yields the minimum-norm solution") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 2, 2, 3, 3, 4, 4;
  Eigen::VectorXd t(4);
  t << 2, 4, 6, 8;
  const RegressionFit fit = regress(x, t);
  CHECK(fit.rank == 1);
  CHECK(fit.rank_deficient);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0));
  CHECK(fit.coefficients(1) == doctest::Approx(1.0));

  const RegressionFit ridge = regress(x, t, 1e-8);
  CHECK(ridge.coefficients.sum() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(regress(x, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("mean and sample standard deviation") {
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  const auto [m, s] = mean_std(v);
  CHECK(m == 2.5);
  CHECK(s == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("exit indices agree with a brute-force walk of the stopping rule") {
  auto s = fixture::small_setup(400, 30);
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  const LsmcResult r = backward_induct(b, s.lsmc);
  const int n = b.n_steps();

  // Re-evaluate every continuation estimate from the stored fits.
  for (int i = 1; i < n; ++i) {
    const Standardization st{r.scalings(i, 0), r.scalings(i, 1), r.scalings(i, 2),
                             r.scalings(i, 3)};
    for (int j = 0; j < 40; ++j) {
      const Eigen::VectorXd phi = build_basis((b.s(j, i) - st.s_mean) / st.s_scale,
                                              (b.y(j, i) - st.y_mean) / st.y_scale, 3);
      const double c = phi.dot(r.coefficients.row(i).transpose());
      REQUIRE(r.stop(j, i) == (c <= 0.0));
    }
  }

  double total = 0;
  for (int j = 0; j < 40; ++j) {
    int tau = n;
    for (int i = 1; i < n; ++i)
      if (r.stop(j, i)) {
        tau = i;
        break;
      }
    CHECK(r.exit_index(j) == tau);
    CHECK(r.exit_times(j) == doctest::Approx(b.times(tau)));
    total += b.perf(j, tau) - b.perf(j, 0);
  }
  // The estimate is the average realised gain; check it on the first 40.
  double sum40 = 0;
  for (int j = 0; j < 40; ++j) sum40 += b.perf(j, r.exit_index(j)) - b.perf(j, 0);
  CHECK(sum40 == doctest::Approx(total));
  CHECK(r.v0_exercisable() >= 0.0);
  CHECK(r.v0_exercisable() >= r.v0_estimate);
}

TEST_CASE("value matrix holds realised continuation cash flows") {
  auto s = fixture::small_setup(300, 12);
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  const LsmcResult r = backward_induct(b, s.lsmc);
  const int n = b.n_steps();
  auto next_exit = [&](int j, int i) {
    for (int k = i + 1; k < n; ++k)
      if (r.stop(j, k)) return k;
    return n;
  };
  for (int j = 0; j < 20; ++j)
    for (int i = 1; i < n; ++i) {
      const double expect = r.stop(j, i) ? 0.0 : b.perf(j, next_exit(j, i)) - b.perf(j, i);
      CHECK(r.values(j, i) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("single-period estimate is the sample mean of the gain") {
  auto s = fixture::tiny_setup();
  s.sim.n_steps = 1;
  s.sim.n_paths = 20000;
  s.lsmc.degree = 1;
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  const LsmcResult r = backward_induct(b, s.lsmc);
  oracle::TreeModel m{s.pool, s.market, s.fee, 1};
  CHECK(std::abs(r.v0_estimate - oracle::tree_continuation_value(m)) < 3 * r.v0_stderr);
}

TEST_CASE("four-step estimate matches exhaustive backward induction") {
  auto s = fixture::tiny_setup();
  s.sim.n_paths = 20000;
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  const LsmcResult r = backward_induct(b, s.lsmc);
  oracle::TreeModel m{s.pool, s.market, s.fee, 4};
  const double dp = oracle::tree_continuation_value(m);
  CHECK(dp > 0);
  CHECK(std::abs(r.v0_estimate - dp) < 3 * r.v0_stderr);
}

TEST_CASE("surviving-path regression option runs and differs only in the fit population") {
  auto s = fixture::small_setup(500, 20);
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  s.lsmc.regress_all_paths = false;
  const LsmcResult r = backward_induct(b, s.lsmc);
  CHECK(r.exit_index.minCoeff() >= 1);
  CHECK(r.exit_index.maxCoeff() <= b.n_steps());
}

TEST_CASE("too few paths for the basis is rejected") {
  auto s = fixture::small_setup(50, 10);
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  CHECK_THROWS_AS(backward_induct(b, s.lsmc), std::invalid_argument);
  LsmcConfig bad;
  bad.degree = 0;
  CHECK_THROWS_AS(bad.validate(1000), std::invalid_argument);
}

TEST_CASE("exit statistics decompose performance") {
  auto s = fixture::small_setup(500, 20);
  const PathBundle b = simulate(s.pool, s.market, s.fee, s.sim);
  const LsmcResult r = backward_induct(b, s.lsmc);
  const ExitStatistics st = exit_statistics(r, b);
  CHECK(st.n_paths == 500);
  CHECK(st.mean_perf == doctest::Approx(st.mean_R - st.mean_IL));
  CHECK(st.mean_perf == doctest::Approx(r.v0_estimate));
  CHECK(st.mean_tau > 0.0);
  CHECK(st.mean_tau <= 1.0);
}

TEST_CASE("hand-built two-step tree: regression rule is the best of all stopping rules") {
  // Four path shapes, ten copies each. At step 1 the paths sit in one of two
  // states; a stopping rule is a stop/hold choice per state.
  const PoolConfig pool = PoolConfig::from_reserves(10, 10, 1, 9, 11);
  struct Shape {
    double s1;
    int y1;
    double r1;
    double s2;
    int y2;
    double r2;
  };
  const Shape shapes[] = {{1.5, 1, 0.1, 2.0, 1, 0.2},
                          {1.5, 1, 0.1, 1.0, 0, 0.2},
                          {0.5, 2, 0.0, 0.2, 2, 0.0},
                          {0.5, 2, 0.0, 0.3, 2, 0.0}};
  PathBundle b(pool, 1.0, 1.0, 40, 2);
  for (int j = 0; j < 40; ++j) {
    const Shape& sh = shapes[j % 4];
    b.s(j, 0) = 1.0;
    b.y_index(j, 0) = 1;
    b.r(j, 0) = 0.0;
    b.s(j, 1) = sh.s1;
    b.y_index(j, 1) = sh.y1;
    b.r(j, 1) = sh.r1;
    b.s(j, 2) = sh.s2;
    b.y_index(j, 2) = sh.y2;
    b.r(j, 2) = sh.r2;
  }
  b.buys.setZero();
  b.sells.setZero();
  b.dw.setZero();

  LsmcConfig cfg;
  cfg.degree = 1;
  const LsmcResult r = backward_induct(b, cfg);

  double best = -std::numeric_limits<double>::infinity();
  int best_rule = -1;
  for (int rule = 0; rule < 4; ++rule) {
    double total = 0;
    for (int j = 0; j < 40; ++j) {
      const bool state_a = (j % 4) < 2;
      const bool stop = state_a ? (rule & 1) : (rule & 2);
      const int tau = stop ? 1 : 2;
      total += b.perf(j, tau) - b.perf(j, 0);
    }
    if (total / 40 > best) {
      best = total / 40;
      best_rule = rule;
    }
  }
  CHECK(r.v0_estimate == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.stop(0, 1) == static_cast<bool>(best_rule & 1));
  CHECK(r.stop(2, 1) == static_cast<bool>(best_rule & 2));
  CHECK(best_rule != 0);  // the tree is built so that some stop is worth taking
}
