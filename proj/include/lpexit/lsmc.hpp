#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lpexit/simulate.hpp"

namespace lpexit {

enum class BasisKind { total_degree_poly };

struct LsmcConfig {
  int degree = 3;
  BasisKind basis = BasisKind::total_degree_poly;
  double ridge = 0.0;
  bool standardize = true;
  /// true: every path enters each regression. false: only paths that
  /// continued at the following date (stop flag at i+1 unset).
  bool regress_all_paths = true;

  int n_features() const { return (degree + 1) * (degree + 2) / 2; }
  void validate(int n_paths) const;
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct LsmcResult {
  Eigen::MatrixXd values;   // V, n_paths x (n_steps + 1)
  BoolMatrix stop;          // stop flags from the backward pass
  Eigen::VectorXi exit_index;
  Eigen::VectorXd exit_times;
  double v0_estimate = 0;
  double v0_stderr = 0;
  Eigen::MatrixXd coefficients;  // row i: fit used at date i (rows 0 and n unused)
  Eigen::MatrixXd scalings;      // row i: s_mean, s_scale, y_mean, y_scale
  int rank_deficient_steps = 0;

  /// Value when stopping at t = 0 is also allowed.
  double v0_exercisable() const { return v0_estimate > 0 ? v0_estimate : 0.0; }
};

/// Monomials s^a y^b with a + b <= degree, ordered by total degree and then
/// by decreasing power of s: (1, s, y, s^2, s y, y^2, ...).
Eigen::VectorXd build_basis(double s, double y, int degree);

/// Per-slice affine map applied to (s, y) before forming monomials.
struct Standardization {
  double s_mean = 0, s_scale = 1, y_mean = 0, y_scale = 1;

  static Standardization fit(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
};

Eigen::MatrixXd basis_matrix(const Eigen::VectorXd& s, const Eigen::VectorXd& y, int degree,
                             const Standardization& scaling = {});

struct RegressionFit {
  Eigen::VectorXd coefficients;
  int rank = 0;
  bool rank_deficient = false;
};

/// Least squares through a complete orthogonal decomposition (minimum-norm on
/// rank deficiency); ridge > 0 solves the Tikhonov normal equations instead.
RegressionFit regress(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      double ridge = 0.0);

/// Longstaff-Schwartz backward induction on a simulated bundle.
LsmcResult backward_induct(const PathBundle& bundle, const LsmcConfig& cfg);

struct ExitStatistics {
  double mean_tau = 0, std_tau = 0;
  double mean_R = 0, std_R = 0;
  double mean_IL = 0, std_IL = 0;
  double mean_perf = 0, std_perf = 0;
  int n_paths = 0;
};

/// Across-path mean and standard deviation of tau, R_tau, IL_tau and
/// R_tau - IL_tau.
ExitStatistics exit_statistics(const LsmcResult& result, const PathBundle& bundle);

/// Sample mean and (n - 1)-normalised standard deviation, summed in index order.
std::pair<double, double> mean_std(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace lpexit
