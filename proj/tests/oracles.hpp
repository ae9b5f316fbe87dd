#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers; only the model primitives (pool geometry,
// intensities) are shared.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lpexit/model.hpp"

namespace oracle {

struct TreeModel {
  lpexit::PoolConfig pool;
  lpexit::MarketParams market;
  lpexit::FeeSchedule fee;
  int n_steps = 4;
};

inline double perf_at(const lpexit::PoolConfig& pool, int idx, double s, double fees) {
  const double y = pool.lattice_value(idx);
  const double x = pool.depth_c / y;
  return fees + (x - pool.x0) + s * (y - pool.y0);
}

/// Exhaustive backward induction on the binomial-S, thinned-jump chain that
/// the simulator draws with binomial increments: S moves +-sigma sqrt(dt),
/// then a buy and a sell are each executed independently with probability
/// min(1, lambda(Y_prev, S_new) dt), gated on the reserve bounds.
///
/// Returns the continuation value at t = 0 (no exit allowed at 0; forced
/// exit at T). Exit is allowed at every intermediate date.
inline double tree_continuation_value(const TreeModel& m) {
  const int n = m.n_steps;
  const int ny = m.pool.lattice_size();
  const double dt = m.market.horizon_T / n;
  const double step = m.market.sigma * std::sqrt(dt);
  auto s_of = [&](int k, int ups) { return m.market.s0 + step * (2 * ups - k); };

  // value[idx][ups] = V_k; the running fee total does not affect the
  // stopping problem because only increments of the performance matter.
  std::vector<std::vector<double>> next(ny, std::vector<double>(n + 1, 0.0));
  double c0 = 0;
  for (int k = n - 1; k >= 0; --k) {
    std::vector<std::vector<double>> now(ny, std::vector<double>(k + 1, 0.0));
    for (int idx = 0; idx < ny; ++idx) {
      for (int ups = 0; ups <= k; ++ups) {
        const double s = s_of(k, ups);
        const double a_now = perf_at(m.pool, idx, s, 0.0);
        const double y = m.pool.lattice_value(idx);
        double cont = 0;
        for (int move = 0; move < 2; ++move) {
          const int ups2 = ups + move;
          const double s2 = s_of(k + 1, ups2);
          const double pb =
              idx + 1 < ny ? std::min(1.0, lpexit::intensity_buy_at(m.market, m.pool, y, s2) * dt)
                           : 0.0;
          const double ps =
              idx > 0 ? std::min(1.0, lpexit::intensity_sell_at(m.market, m.pool, y, s2) * dt)
                      : 0.0;
          for (int b = 0; b < 2; ++b) {
            for (int a = 0; a < 2; ++a) {
              const double p = 0.5 * (b ? pb : 1 - pb) * (a ? ps : 1 - ps);
              if (p == 0) continue;
              const int idx2 = idx + b - a;
              const double fees = (a + b) * m.fee(y);
              const double gain = perf_at(m.pool, idx2, s2, fees) - a_now;
              cont += p * (gain + next[idx2][ups2]);
            }
          }
        }
        now[idx][ups] = k == 0 ? cont : std::max(0.0, cont);
        if (k == 0 && idx == m.pool.y0_index()) c0 = cont;
      }
    }
    next = std::move(now);
  }
  return c0;
}

/// Dense reference for one implicit diffusion step: solves
/// (I - a L) u = rhs with L the Neumann second-difference matrix, via LU.
inline Eigen::VectorXd dense_neumann_solve(const Eigen::VectorXd& rhs, double a) {
  const Eigen::Index n = rhs.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j > 0) {
      m(j, j) += a;
      m(j, j - 1) -= a;
    }
    if (j + 1 < n) {
      m(j, j) += a;
      m(j, j + 1) -= a;
    }
  }
  return m.partialPivLu().solve(rhs);
}

/// Brute-force solution of min{A u - b, u} = 0 for small n: tries every
/// active set and keeps the one satisfying all complementarity conditions.
inline Eigen::VectorXd brute_force_obstacle(const Eigen::VectorXd& b, double a) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    if (j > 0) {
      m(j, j) += a;
      m(j, j - 1) -= a;
    }
    if (j + 1 < n) {
      m(j, j) += a;
      m(j, j + 1) -= a;
    }
  }
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Eigen::MatrixXd sys = m;
    Eigen::VectorXd rhs = b;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        sys.row(j).setZero();
        sys(j, j) = 1;
        rhs(j) = 0;
      }
    }
    const Eigen::VectorXd u = sys.partialPivLu().solve(rhs);
    const Eigen::VectorXd res = m * u - b;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j)
      ok = u(j) >= -1e-12 && res(j) >= -1e-10 && std::abs(std::min(u(j), res(j))) <= 1e-10;
    if (ok) return u;
  }
  return Eigen::VectorXd::Constant(n, std::nan(""));
}

}  // namespace oracle
