#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpexit/model.hpp"

namespace lpexit {

/// Values on one time level: row = reserve lattice index, column = S node.
using Slice = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SliceMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// How the stopping constraint v >= 0 enters each time step.
enum class ObstacleMode {
  implicit,    // the implicit diffusion solve is a complementarity problem
  projection,  // plain implicit solve, then v <- max(v, 0)
};

struct GridSpec {
  double s_min = 0;
  double s_max = 0;
  int n_s = 400;
  int n_t = 400;
  /// Keep every record_stride-th time level (0 and n_t always kept).
  int record_stride = 1;
  ObstacleMode obstacle = ObstacleMode::implicit;

  double ds() const { return (s_max - s_min) / n_s; }
  double dt(const MarketParams& mp) const { return mp.horizon_T / n_t; }
  double s_node(int j) const { return s_min + j * ds(); }
  Eigen::VectorXd s_nodes() const { return Eigen::VectorXd::LinSpaced(n_s + 1, s_min, s_max); }

  /// S0 +- width * sigma * sqrt(T).
  static GridSpec centred(const MarketParams& mp, int n_s, int n_t, double width = 5.0);
  void validate(const MarketParams& mp) const;
};

struct RiskAversion {
  double psi = 0;
  void validate() const;
};

struct SolverDiagnostics {
  int substeps = 1;
  double max_intensity = 0;
  long long exp_clamps = 0;
  std::vector<std::string> notes;
};

struct ValueGrid {
  PoolConfig pool;
  GridSpec grid;
  std::vector<int> t_index;  // recorded time levels, ascending
  std::vector<double> times;
  std::vector<Slice> values;
  std::vector<SliceMask> exercise;
  SolverDiagnostics diagnostics;

  int n_levels() const { return static_cast<int>(values.size()); }
  int n_y() const { return static_cast<int>(values.front().rows()); }
  /// Position in `values` of the recorded level closest to time t.
  int level_near(double t) const;
  /// Linear interpolation in S at a lattice reserve y; clamps outside the grid.
  double value_at(int level, double y, double s) const;
};

/// Per-node intensities and trade payoffs, gated by reserve admissibility.
/// They do not depend on time, so a solve computes them once.
struct JumpCoefficients {
  Slice lambda_buy, lambda_sell, beta_buy, beta_sell;

  JumpCoefficients(const PoolConfig& pool, const MarketParams& mp, const FeeSchedule& fee,
                   const Eigen::VectorXd& s_nodes);
  double max_intensity() const;
};

/// Explicit jump update v + dt * sum_i lambda_i [beta_i + v(y +- xi) - v(y)].
Slice jump_step(const Slice& v, const JumpCoefficients& jc, double dt);
Slice jump_step(const Slice& v, const PoolConfig& pool, const MarketParams& mp,
                const FeeSchedule& fee, const Eigen::VectorXd& s_nodes, double dt);

/// Exponential-utility jump update with the -psi sigma^2/2 (dv/dS)^2 term.
/// Exponent arguments beyond +-700 are clamped and counted.
Slice jump_step_risk_averse(const Slice& v, const JumpCoefficients& jc, double dt, double psi,
                            double sigma, double ds, long long* clamps = nullptr);

/// Implicit step (I - dt sigma^2/2 D2) v_new = v on every reserve level with
/// zero-flux ghost nodes at both ends of the S grid.
Slice diffusion_step(const Slice& v, double sigma, double dt, double ds);

/// Solves the constant-coefficient tridiagonal system
/// (1+2a) x_j - a (x_{j-1} + x_{j+1}) = rhs_j with Neumann closure, in place.
void solve_neumann_tridiagonal(Eigen::Ref<Eigen::VectorXd> rhs, double a);

/// Solves min{A u - rhs, u} = 0 in place, A being the Neumann matrix of
/// solve_neumann_tridiagonal. Returns the nodes held at the obstacle u = 0.
Eigen::Matrix<bool, Eigen::Dynamic, 1> solve_neumann_obstacle(Eigen::Ref<Eigen::VectorXd> rhs,
                                                              double a);

struct Projection {
  Slice values;
  SliceMask exercise;
};

/// v <- max(v, 0); exercise marks entries whose pre-projection value was <= 0.
Projection qvi_project(const Slice& v);

/// Backward march from v(T) = 0: jump (explicit), then diffusion (implicit)
/// with the constraint v >= 0 imposed per grid.obstacle. Steps are subdivided when dt * max intensity > 0.5.
ValueGrid solve_qvi(const PoolConfig& pool, const MarketParams& mp, const FeeSchedule& fee,
                    const GridSpec& grid);

ValueGrid solve_qvi_risk_averse(const PoolConfig& pool, const MarketParams& mp,
                                const FeeSchedule& fee, const GridSpec& grid,
                                const RiskAversion& ra);

struct ResidualReport {
  double max_abs = 0;     // max |min{continuation residual, v}| over interior nodes
  double scale = 0;       // normaliser: max |v| / T
  double max_scaled = 0;  // max_abs / scale
  double min_value = 0;
  bool terminal_zero = false;
};

/// A posteriori check of min{-D_t v - sigma^2/2 D_ss v - J[v], v} = 0 between
/// consecutive recorded levels (requires record_stride == 1).
ResidualReport qvi_residual(const ValueGrid& vg, const MarketParams& mp, const FeeSchedule& fee);

struct Interval {
  double lo = 0;
  double hi = 0;
};

struct PolicySurface {
  std::vector<double> times;
  std::vector<double> reserves;
  /// continuation[level][y] lists maximal S intervals where holding is optimal.
  std::vector<std::vector<std::vector<Interval>>> continuation;

  double hold_length(int level, int y_row) const;
};

PolicySurface extract_policy(const ValueGrid& vg);

struct SliceRow {
  double t, y, s, v;
  bool exercise;
};

std::vector<SliceRow> slice_at_time(const ValueGrid& vg, int level);
std::vector<SliceRow> slice_at_reserve(const ValueGrid& vg, double y);

}  // namespace lpexit
