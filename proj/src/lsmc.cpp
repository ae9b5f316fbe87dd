#include "lpexit/lsmc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lpexit {

void LsmcConfig::validate(int n_paths) const {
  if (degree < 1) throw std::invalid_argument("lsmc: degree must be >= 1");
  if (ridge < 0) throw std::invalid_argument("lsmc: ridge must be nonnegative");
  if (n_features() * 10 > n_paths)
    throw std::invalid_argument("lsmc: " + std::to_string(n_features()) +
                                " basis functions need at least " +
                                std::to_string(n_features() * 10) + " paths");
}

Eigen::VectorXd build_basis(double s, double y, int degree) {
  Eigen::VectorXd out((degree + 1) * (degree + 2) / 2);
  int col = 0;
  for (int g = 0; g <= degree; ++g)
    for (int b = 0; b <= g; ++b) out(col++) = std::pow(s, g - b) * std::pow(y, b);
  return out;
}

Standardization Standardization::fit(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  Standardization st;
  auto [sm, ss] = mean_std(s);
  auto [ym, ys] = mean_std(y);
  st.s_mean = sm;
  st.y_mean = ym;
  st.s_scale = ss > 0 ? ss : 1.0;
  st.y_scale = ys > 0 ? ys : 1.0;
  return st;
}

Eigen::MatrixXd basis_matrix(const Eigen::VectorXd& s, const Eigen::VectorXd& y, int degree,
                             const Standardization& scaling) {
  const Eigen::Index rows = s.size();
  const Eigen::ArrayXd su = (s.array() - scaling.s_mean) / scaling.s_scale;
  const Eigen::ArrayXd yu = (y.array() - scaling.y_mean) / scaling.y_scale;

  // Powers 0..degree of each regressor, then products.
  std::vector<Eigen::ArrayXd> sp(degree + 1, Eigen::ArrayXd::Ones(rows));
  std::vector<Eigen::ArrayXd> yp(degree + 1, Eigen::ArrayXd::Ones(rows));
  for (int p = 1; p <= degree; ++p) {
    sp[p] = sp[p - 1] * su;
    yp[p] = yp[p - 1] * yu;
  }
  Eigen::MatrixXd out(rows, (degree + 1) * (degree + 2) / 2);
  int col = 0;
  for (int g = 0; g <= degree; ++g)
    for (int b = 0; b <= g; ++b) out.col(col++) = (sp[g - b] * yp[b]).matrix();
  return out;
}

RegressionFit regress(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      double ridge) {
  if (features.rows() != targets.size())
    throw std::invalid_argument("regress: feature rows and target length differ");
  RegressionFit fit;
  if (ridge > 0) {
    const Eigen::Index p = features.cols();
    Eigen::MatrixXd gram = features.transpose() * features;
    gram.diagonal().array() += ridge;
    fit.coefficients = gram.ldlt().solve(features.transpose() * targets);
    fit.rank = static_cast<int>(p);
    return fit;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(features);
  fit.coefficients = cod.solve(targets);
  fit.rank = static_cast<int>(cod.rank());
  fit.rank_deficient = fit.rank < features.cols();
  return fit;
}

std::pair<double, double> mean_std(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  if (n == 0) return {0.0, 0.0};
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) sum += v(i);
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0;
  for (Eigen::Index i = 0; i < n; ++i) ss += (v(i) - mean) * (v(i) - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

LsmcResult backward_induct(const PathBundle& bundle, const LsmcConfig& cfg) {
  const int m = bundle.n_paths();
  const int n = bundle.n_steps();
  cfg.validate(m);
  const int p = cfg.n_features();

  LsmcResult res;
  res.values = Eigen::MatrixXd::Zero(m, n + 1);
  res.stop = BoolMatrix::Constant(m, n + 1, false);
  res.stop.col(n).setConstant(true);
  res.coefficients = Eigen::MatrixXd::Zero(n + 1, p);
  res.scalings = Eigen::MatrixXd::Zero(n + 1, 4);

  Eigen::VectorXd a_next = bundle.perf_column(n);
  Eigen::VectorXd target(m);
  std::vector<int> population;
  population.reserve(m);

  for (int i = n - 1; i >= 1; --i) {
    const Eigen::VectorXd a_now = bundle.perf_column(i);
    // Cash flow from date i onward if the LP holds at i.
    target = (a_next - a_now) + res.values.col(i + 1);

    const Eigen::VectorXd s_all = bundle.s.col(i);
    const Eigen::VectorXd y_all = bundle.y_column(i);

    population.clear();
    if (!cfg.regress_all_paths && i < n - 1) {
      for (int j = 0; j < m; ++j)
        if (!res.stop(j, i + 1)) population.push_back(j);
    }
    const bool use_all = cfg.regress_all_paths || i == n - 1 ||
                         static_cast<int>(population.size()) < 2 * p;

    Eigen::VectorXd s_fit, y_fit, t_fit;
    if (use_all) {
      s_fit = s_all;
      y_fit = y_all;
      t_fit = target;
    } else {
      const auto k = static_cast<Eigen::Index>(population.size());
      s_fit.resize(k);
      y_fit.resize(k);
      t_fit.resize(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        s_fit(j) = s_all(population[j]);
        y_fit(j) = y_all(population[j]);
        t_fit(j) = target(population[j]);
      }
    }

    const Standardization scaling =
        cfg.standardize ? Standardization::fit(s_fit, y_fit) : Standardization{};
    const RegressionFit fit = regress(basis_matrix(s_fit, y_fit, cfg.degree, scaling), t_fit,
                                      cfg.ridge);
    if (fit.rank_deficient) ++res.rank_deficient_steps;
    res.coefficients.row(i) = fit.coefficients.transpose();

    res.scalings.row(i) << scaling.s_mean, scaling.s_scale, scaling.y_mean, scaling.y_scale;

    const Eigen::VectorXd continuation =
        basis_matrix(s_all, y_all, cfg.degree, scaling) * fit.coefficients;

    for (int j = 0; j < m; ++j) {
      const bool stop = continuation(j) <= 0.0;
      res.stop(j, i) = stop;
      res.values(j, i) = stop ? 0.0 : target(j);
    }
    a_next = a_now;
  }

  res.exit_index = Eigen::VectorXi::Constant(m, n);
  for (int j = 0; j < m; ++j) {
    for (int i = 1; i < n; ++i) {
      if (res.stop(j, i)) {
        res.exit_index(j) = i;
        break;
      }
    }
  }
  res.exit_times.resize(m);
  Eigen::VectorXd realized(m);
  for (int j = 0; j < m; ++j) {
    res.exit_times(j) = bundle.times(res.exit_index(j));
    realized(j) = bundle.perf(j, res.exit_index(j)) - bundle.perf(j, 0);
  }
  const auto [mean, sd] = mean_std(realized);
  res.v0_estimate = mean;
  res.v0_stderr = sd / std::sqrt(static_cast<double>(m));
  return res;
}

ExitStatistics exit_statistics(const LsmcResult& result, const PathBundle& bundle) {
  const int m = bundle.n_paths();
  Eigen::VectorXd tau(m), fees(m), loss(m), perf(m);
  for (int j = 0; j < m; ++j) {
    const int k = result.exit_index(j);
    tau(j) = result.exit_times(j);
    fees(j) = bundle.r(j, k);
    loss(j) = bundle.il(j, k);
    perf(j) = fees(j) - loss(j);
  }
  ExitStatistics st;
  st.n_paths = m;
  std::tie(st.mean_tau, st.std_tau) = mean_std(tau);
  std::tie(st.mean_R, st.std_R) = mean_std(fees);
  std::tie(st.mean_IL, st.std_IL) = mean_std(loss);
  std::tie(st.mean_perf, st.std_perf) = mean_std(perf);
  return st;
}

}  // namespace lpexit
