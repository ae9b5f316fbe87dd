#include "lpexit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lpexit/parallel.hpp"

namespace lpexit {

void SimConfig::validate() const {
  if (n_steps <= 0) throw std::invalid_argument("sim: n_steps must be positive");
  if (n_paths <= 0) throw std::invalid_argument("sim: n_paths must be positive");
}

PathBundle::PathBundle(const PoolConfig& pool_, double sigma_, double horizon_T, int n_paths,
                       int n_steps)
    : pool(pool_),
      sigma(sigma_),
      times(Eigen::VectorXd::LinSpaced(n_steps + 1, 0.0, horizon_T)),
      s(n_paths, n_steps + 1),
      y_index(n_paths, n_steps + 1),
      r(n_paths, n_steps + 1),
      buys(n_paths, n_steps + 1),
      sells(n_paths, n_steps + 1),
      dw(n_paths, n_steps) {}

Eigen::VectorXd PathBundle::y_column(int k) const {
  Eigen::VectorXd out(n_paths());
  for (int i = 0; i < n_paths(); ++i) out(i) = y(i, k);
  return out;
}

Eigen::VectorXd PathBundle::perf_column(int k) const {
  Eigen::VectorXd out(n_paths());
  for (int i = 0; i < n_paths(); ++i) out(i) = perf(i, k);
  return out;
}

namespace {
template <typename F>
Eigen::MatrixXd derive(const PathBundle& b, F&& f) {
  Eigen::MatrixXd out(b.n_paths(), b.n_steps() + 1);
  for (int k = 0; k <= b.n_steps(); ++k)
    for (int i = 0; i < b.n_paths(); ++i) out(i, k) = f(i, k);
  return out;
}

std::seed_seq path_seed(std::uint64_t seed, std::uint64_t path) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
}
}  // namespace

Eigen::MatrixXd PathBundle::y_paths() const {
  return derive(*this, [&](int i, int k) { return y(i, k); });
}
Eigen::MatrixXd PathBundle::x_paths() const {
  return derive(*this, [&](int i, int k) { return x(i, k); });
}
Eigen::MatrixXd PathBundle::z_paths() const {
  return derive(*this, [&](int i, int k) { return z(i, k); });
}
Eigen::MatrixXd PathBundle::il_paths() const {
  return derive(*this, [&](int i, int k) { return il(i, k); });
}
Eigen::MatrixXd PathBundle::perf_paths() const {
  return derive(*this, [&](int i, int k) { return perf(i, k); });
}

PathBundle simulate(const PoolConfig& pool, const MarketParams& params, const FeeSchedule& fee,
                    const SimConfig& sim) {
  pool.validate();
  params.validate();
  fee.validate();
  sim.validate();

  const int m = sim.n_paths;
  const int n = sim.n_steps;
  const double dt = sim.dt(params);
  const double sqrt_dt = std::sqrt(dt);
  const int top = pool.lattice_size() - 1;
  const int start = pool.y0_index();

  PathBundle b(pool, params.sigma, params.horizon_T, m, n);
  std::atomic<std::int64_t> saturated{0};

  constexpr std::size_t chunk = 64;
  parallel_for_chunks(static_cast<std::size_t>(m), chunk, [&](std::size_t begin, std::size_t end) {
    const int width = static_cast<int>(end - begin);
    std::vector<std::mt19937_64> engines;
    std::vector<std::normal_distribution<double>> normals(width);
    engines.reserve(width);
    for (std::size_t p = begin; p < end; ++p) {
      auto seq = path_seed(sim.seed, p);
      engines.emplace_back(seq);
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::int64_t local_saturated = 0;

    for (int j = 0; j < width; ++j) {
      const int i = static_cast<int>(begin) + j;
      b.s(i, 0) = params.s0;
      b.y_index(i, 0) = start;
      b.r(i, 0) = 0.0;
      b.buys(i, 0) = 0;
      b.sells(i, 0) = 0;
    }
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < width; ++j) {
        const int i = static_cast<int>(begin) + j;
        auto& eng = engines[j];
        double dw;
        if (sim.increment == IncrementKind::gaussian) {
          dw = sqrt_dt * normals[j](eng);
        } else {
          dw = uniform(eng) < 0.5 ? -sqrt_dt : sqrt_dt;
        }
        const double u_buy = uniform(eng);
        const double u_sell = uniform(eng);

        const double s_now = b.s(i, k) + params.sigma * dw;
        int idx = b.y_index(i, k);
        const double y_prev = pool.lattice_value(idx);
        const double p_buy = intensity_buy_at(params, pool, y_prev, s_now) * dt;
        const double p_sell = intensity_sell_at(params, pool, y_prev, s_now) * dt;
        if (p_buy > 1.0 || p_sell > 1.0) ++local_saturated;

        const bool buy = idx < top && u_buy < p_buy;
        const bool sell = idx > 0 && u_sell < p_sell;
        const double fee_paid = fee(y_prev);
        double r_now = b.r(i, k);
        if (buy) {
          ++idx;
          r_now += fee_paid;
        }
        if (sell) {
          --idx;
          r_now += fee_paid;
        }
        b.dw(i, k) = dw;
        b.s(i, k + 1) = s_now;
        b.y_index(i, k + 1) = idx;
        b.r(i, k + 1) = r_now;
        b.buys(i, k + 1) = b.buys(i, k) + (buy ? 1 : 0);
        b.sells(i, k + 1) = b.sells(i, k) + (sell ? 1 : 0);
      }
    }
    saturated += local_saturated;
  });
  b.saturated_steps = saturated.load();
  return b;
}

double empirical_quantile(std::vector<double>& sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(sample.begin(), sample.begin() + lo, sample.end());
  const double v_lo = sample[lo];
  if (frac == 0.0 || lo + 1 >= sample.size()) return v_lo;
  const double v_hi = *std::min_element(sample.begin() + lo + 1, sample.end());
  return v_lo + frac * (v_hi - v_lo);
}

std::vector<QuantileCurves> path_quantiles(const PathBundle& bundle, double q_lo, double q_hi) {
  if (!(q_lo > 0 && q_lo < 1 && q_hi > 0 && q_hi < 1))
    throw std::domain_error("quantile levels must lie in (0, 1)");
  if (bundle.n_paths() < 100) throw std::invalid_argument("path_quantiles needs >= 100 paths");

  using Getter = double (PathBundle::*)(int, int) const;
  struct Proc {
    const char* name;
    Getter get;
  };
  const Proc procs[] = {{"Y", &PathBundle::y},   {"X", &PathBundle::x},   {"Z", &PathBundle::z},
                        {"IL", &PathBundle::il}, {"perf", &PathBundle::perf}};

  const int m = bundle.n_paths();
  const int cols = bundle.n_steps() + 1;
  std::vector<QuantileCurves> out;
  std::vector<double> sample(m);

  auto fill = [&](const std::string& name, auto&& value) {
    QuantileCurves qc{name, Eigen::VectorXd(cols), Eigen::VectorXd(cols)};
    for (int k = 0; k < cols; ++k) {
      for (int i = 0; i < m; ++i) sample[i] = value(i, k);
      qc.lo(k) = empirical_quantile(sample, q_lo);
      qc.hi(k) = empirical_quantile(sample, q_hi);
    }
    out.push_back(std::move(qc));
  };

  fill("S", [&](int i, int k) { return bundle.s(i, k); });
  fill("R", [&](int i, int k) { return bundle.r(i, k); });
  for (const auto& p : procs) fill(p.name, [&](int i, int k) { return (bundle.*p.get)(i, k); });
  return out;
}

}  // namespace lpexit
