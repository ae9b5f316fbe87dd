#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpexit/model.hpp"

namespace lpexit {

enum class IncrementKind {
  gaussian,  // dW ~ N(0, dt)
  binomial,  // dW = +-sqrt(dt) with probability 1/2 each
};

struct SimConfig {
  int n_steps = 1440;
  int n_paths = 10000;
  std::uint64_t seed = 20240601;
  bool record_quantiles = false;
  IncrementKind increment = IncrementKind::gaussian;

  double dt(const MarketParams& mp) const { return mp.horizon_T / n_steps; }
  void validate() const;
};

using IndexMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Simulated trajectories. Matrices are n_paths x (n_steps + 1), column k
/// holding the state after step k. Only the independent coordinates are
/// stored (S, lattice index of Y, R, jump counts, Brownian increments); X, IL
/// and the performance -IL + R are derived exactly from them.
struct PathBundle {
  PoolConfig pool;
  double sigma = 0;
  Eigen::VectorXd times;
  Eigen::MatrixXd s;
  IndexMatrix y_index;
  Eigen::MatrixXd r;
  IndexMatrix buys;
  IndexMatrix sells;
  Eigen::MatrixXd dw;  // n_paths x n_steps
  /// Steps where lambda * dt exceeded 1 and the event probability was clamped.
  std::int64_t saturated_steps = 0;

  PathBundle() = default;
  PathBundle(const PoolConfig& pool, double sigma, double horizon_T, int n_paths, int n_steps);

  int n_paths() const { return static_cast<int>(s.rows()); }
  int n_steps() const { return static_cast<int>(s.cols()) - 1; }
  double dt() const { return times(1) - times(0); }

  double y(int path, int k) const { return pool.lattice_value(y_index(path, k)); }
  double x(int path, int k) const { return pool.depth_c / y(path, k); }
  double z(int path, int k) const { return marginal_price(pool, y(path, k)); }
  double il(int path, int k) const {
    return -((x(path, k) - pool.x0) + s(path, k) * (y(path, k) - pool.y0));
  }
  /// Entry (path, k) of the matrix A of -IL + R.
  double perf(int path, int k) const { return r(path, k) - il(path, k); }

  Eigen::VectorXd y_column(int k) const;
  Eigen::VectorXd perf_column(int k) const;

  Eigen::MatrixXd y_paths() const;
  Eigen::MatrixXd x_paths() const;
  Eigen::MatrixXd z_paths() const;
  Eigen::MatrixXd il_paths() const;
  Eigen::MatrixXd perf_paths() const;
};

/// Simulates n_paths trajectories of the pool under the intensity-driven
/// taker flow. Per step: S moves by sigma dW; intensities are read at
/// (Y_{t-}, S_t); one buy and one sell are each thinned with probability
/// min(1, lambda dt) gated on the reserve bounds; fees r(Y_{t-}) accrue per
/// executed trade. Path i draws from its own engine seeded by (seed, i).
PathBundle simulate(const PoolConfig& pool, const MarketParams& params, const FeeSchedule& fee,
                    const SimConfig& sim);

struct QuantileCurves {
  std::string process;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// Per-time empirical quantiles (linear interpolation between order
/// statistics) of S, Z, Y, X, R, IL and perf.
std::vector<QuantileCurves> path_quantiles(const PathBundle& bundle, double q_lo, double q_hi);

/// Linear-interpolation quantile of a sample; the sample is reordered.
double empirical_quantile(std::vector<double>& sample, double q);

}  // namespace lpexit
