#include "lpexit/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpexit {

GridSpec GridSpec::centred(const MarketParams& mp, int n_s, int n_t, double width) {
  const double half = width * mp.sigma * std::sqrt(mp.horizon_T);
  GridSpec g;
  g.s_min = mp.s0 - half;
  g.s_max = mp.s0 + half;
  g.n_s = n_s;
  g.n_t = n_t;
  return g;
}

void GridSpec::validate(const MarketParams& mp) const {
  if (!(s_min < s_max)) throw std::invalid_argument("grid: require s_min < s_max");
  if (n_s < 2 || n_t < 1) throw std::invalid_argument("grid: require n_s >= 2 and n_t >= 1");
  if (record_stride < 1) throw std::invalid_argument("grid: record_stride must be >= 1");
  const double reach = 4.0 * mp.sigma * std::sqrt(mp.horizon_T);
  if (s_min > mp.s0 - reach || s_max < mp.s0 + reach)
    throw std::invalid_argument("grid: [s_min, s_max] must contain S0 +- 4 sigma sqrt(T)");
}

void RiskAversion::validate() const {
  if (!(psi > 0)) throw std::invalid_argument("risk aversion: psi must be positive");
}

int ValueGrid::level_near(double t) const {
  int best = 0;
  for (int l = 1; l < n_levels(); ++l)
    if (std::abs(times[l] - t) < std::abs(times[best] - t)) best = l;
  return best;
}

double ValueGrid::value_at(int level, double y, double s) const {
  const int row = pool.lattice_index(y);
  const double pos = std::clamp((s - grid.s_min) / grid.ds(), 0.0, static_cast<double>(grid.n_s));
  const int j = std::min(static_cast<int>(pos), grid.n_s - 1);
  const double w = pos - j;
  const Slice& v = values[level];
  return (1.0 - w) * v(row, j) + w * v(row, j + 1);
}

JumpCoefficients::JumpCoefficients(const PoolConfig& pool, const MarketParams& mp,
                                   const FeeSchedule& fee, const Eigen::VectorXd& s_nodes) {
  const int ny = pool.lattice_size();
  const auto ns = static_cast<int>(s_nodes.size());
  lambda_buy = Slice::Zero(ny, ns);
  lambda_sell = Slice::Zero(ny, ns);
  beta_buy = Slice::Zero(ny, ns);
  beta_sell = Slice::Zero(ny, ns);
  for (int r = 0; r < ny; ++r) {
    const double y = pool.lattice_value(r);
    for (int j = 0; j < ns; ++j) {
      const double s = s_nodes(j);
      if (r + 1 < ny) {
        lambda_buy(r, j) = intensity_buy_at(mp, pool, y, s);
        beta_buy(r, j) = beta_buy_at(pool, fee, r, s);
      }
      if (r > 0) {
        lambda_sell(r, j) = intensity_sell_at(mp, pool, y, s);
        beta_sell(r, j) = beta_sell_at(pool, fee, r, s);
      }
    }
  }
}

double JumpCoefficients::max_intensity() const {
  return std::max(lambda_buy.maxCoeff(), lambda_sell.maxCoeff());
}

Slice jump_step(const Slice& v, const JumpCoefficients& jc, double dt) {
  const Eigen::Index ny = v.rows();
  Slice out = v;
  for (Eigen::Index r = 0; r < ny; ++r) {
    if (r + 1 < ny)
      out.row(r).array() += dt * jc.lambda_buy.row(r).array() *
                            (jc.beta_buy.row(r).array() + v.row(r + 1).array() - v.row(r).array());
    if (r > 0)
      out.row(r).array() +=
          dt * jc.lambda_sell.row(r).array() *
          (jc.beta_sell.row(r).array() + v.row(r - 1).array() - v.row(r).array());
  }
  return out;
}

Slice jump_step(const Slice& v, const PoolConfig& pool, const MarketParams& mp,
                const FeeSchedule& fee, const Eigen::VectorXd& s_nodes, double dt) {
  return jump_step(v, JumpCoefficients(pool, mp, fee, s_nodes), dt);
}

namespace {
constexpr double kExpLimit = 700.0;

// (1/psi) (1 - exp(-psi x)), with the exponent clamped to +-700.
double utility_increment(double x, double psi, long long& clamps) {
  double arg = -psi * x;
  if (arg > kExpLimit || arg < -kExpLimit) {
    ++clamps;
    arg = std::clamp(arg, -kExpLimit, kExpLimit);
  }
  return -std::expm1(arg) / psi;
}
}  // namespace

Slice jump_step_risk_averse(const Slice& v, const JumpCoefficients& jc, double dt, double psi,
                            double sigma, double ds, long long* clamps) {
  const Eigen::Index ny = v.rows();
  const Eigen::Index ns = v.cols();
  long long local_clamps = 0;
  Slice out = v;
  for (Eigen::Index r = 0; r < ny; ++r) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      double jump = 0;
      if (r + 1 < ny)
        jump += jc.lambda_buy(r, j) *
                utility_increment(jc.beta_buy(r, j) + v(r + 1, j) - v(r, j), psi, local_clamps);
      if (r > 0)
        jump += jc.lambda_sell(r, j) *
                utility_increment(jc.beta_sell(r, j) + v(r - 1, j) - v(r, j), psi, local_clamps);
      double grad;
      if (j == 0)
        grad = (v(r, 1) - v(r, 0)) / ds;
      else if (j == ns - 1)
        grad = (v(r, j) - v(r, j - 1)) / ds;
      else
        grad = (v(r, j + 1) - v(r, j - 1)) / (2.0 * ds);
      out(r, j) += dt * (jump - 0.5 * sigma * sigma * psi * grad * grad);
    }
  }
  if (clamps) *clamps += local_clamps;
  return out;
}

namespace {
// Factorisation of the Neumann matrix shared by every reserve level.
class NeumannSolver {
 public:
  NeumannSolver(Eigen::Index n, double a) : a_(a), cprime_(n), inv_denom_(n) {
    if (n < 2 || a == 0.0) return;
    double denom = 1.0 + a;
    cprime_(0) = -a / denom;
    inv_denom_(0) = 1.0 / denom;
    for (Eigen::Index j = 1; j < n; ++j) {
      const double diag = (j == n - 1) ? 1.0 + a : 1.0 + 2.0 * a;
      denom = diag + a * cprime_(j - 1);
      cprime_(j) = -a / denom;
      inv_denom_(j) = 1.0 / denom;
    }
  }

  template <typename Row>
  void apply(Row&& x) const {
    const Eigen::Index n = x.size();
    if (n < 2 || a_ == 0.0) return;
    x(0) *= inv_denom_(0);
    for (Eigen::Index j = 1; j < n; ++j) x(j) = (x(j) + a_ * x(j - 1)) * inv_denom_(j);
    for (Eigen::Index j = n - 2; j >= 0; --j) x(j) -= cprime_(j) * x(j + 1);
  }

 private:
  double a_;
  Eigen::VectorXd cprime_, inv_denom_;
};
}  // namespace

namespace {
// Implicit step with the obstacle u >= 0 built in: solves the linear
// complementarity problem min{A u - b, u} = 0 for the Neumann matrix A by
// policy iteration. A is an M-matrix, so the iteration ends after finitely
// many policy changes (typically two or three).
class ObstacleSolver {
 public:
  ObstacleSolver(Eigen::Index n, double a) : a_(a), lower_(n), diag_(n), upper_(n), cp_(n), dp_(n) {}

  template <typename Row, typename MaskRow>
  int apply(Row&& x, MaskRow&& pinned) const {
    const Eigen::Index n = x.size();
    const Eigen::VectorXd b = x.transpose();
    pinned.setConstant(false);
    for (int iter = 0; iter <= n + 1; ++iter) {
      solve_policy(b, pinned, x);
      bool changed = false;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double res = residual(x, b, j);
        // Keep the current branch on ties so the iteration cannot cycle.
        const bool want = pinned(j) ? x(j) <= res : x(j) < res;
        if (want != pinned(j)) {
          pinned(j) = want;
          changed = true;
        }
      }
      if (!changed) return iter + 1;
    }
    throw std::runtime_error("pde: obstacle policy iteration did not converge");
  }

 private:
  template <typename Row>
  double residual(const Row& x, const Eigen::VectorXd& b, Eigen::Index j) const {
    const Eigen::Index n = x.size();
    const double left = j > 0 ? x(j - 1) : x(j);
    const double right = j + 1 < n ? x(j + 1) : x(j);
    return x(j) - a_ * (left - 2.0 * x(j) + right) - b(j);
  }

  template <typename MaskRow, typename Row>
  void solve_policy(const Eigen::VectorXd& b, const MaskRow& pinned, Row& x) const {
    const Eigen::Index n = b.size();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (pinned(j)) {
        lower_(j) = 0;
        diag_(j) = 1;
        upper_(j) = 0;
        dp_(j) = 0;
        continue;
      }
      lower_(j) = j > 0 ? -a_ : 0.0;
      upper_(j) = j + 1 < n ? -a_ : 0.0;
      diag_(j) = 1.0 + (j > 0 ? a_ : 0.0) + (j + 1 < n ? a_ : 0.0);
      dp_(j) = b(j);
    }
    cp_(0) = upper_(0) / diag_(0);
    dp_(0) = dp_(0) / diag_(0);
    for (Eigen::Index j = 1; j < n; ++j) {
      const double denom = diag_(j) - lower_(j) * cp_(j - 1);
      cp_(j) = upper_(j) / denom;
      dp_(j) = (dp_(j) - lower_(j) * dp_(j - 1)) / denom;
    }
    x(n - 1) = dp_(n - 1);
    for (Eigen::Index j = n - 2; j >= 0; --j) x(j) = dp_(j) - cp_(j) * x(j + 1);
  }

  double a_;
  mutable Eigen::VectorXd lower_, diag_, upper_, cp_, dp_;
};
}  // namespace

Eigen::Matrix<bool, Eigen::Dynamic, 1> solve_neumann_obstacle(Eigen::Ref<Eigen::VectorXd> rhs,
                                                              double a) {
  Eigen::Matrix<bool, Eigen::Dynamic, 1> pinned(rhs.size());
  if (rhs.size() < 2) {
    pinned(0) = rhs(0) <= 0;
    rhs(0) = std::max(rhs(0), 0.0);
    return pinned;
  }
  ObstacleSolver(rhs.size(), a).apply(rhs, pinned);
  return pinned;
}

void solve_neumann_tridiagonal(Eigen::Ref<Eigen::VectorXd> rhs, double a) {
  NeumannSolver(rhs.size(), a).apply(rhs);
}

Slice diffusion_step(const Slice& v, double sigma, double dt, double ds) {
  const double a = dt * 0.5 * sigma * sigma / (ds * ds);
  NeumannSolver solver(v.cols(), a);
  Slice out = v;
  for (Eigen::Index r = 0; r < out.rows(); ++r) solver.apply(out.row(r));
  return out;
}

Projection qvi_project(const Slice& v) {
  return {v.cwiseMax(0.0), (v.array() <= 0.0).matrix()};
}

namespace {
template <typename Explicit>
ValueGrid march(const PoolConfig& pool, const MarketParams& mp, const FeeSchedule& fee,
                const GridSpec& grid, Explicit&& explicit_part) {
  pool.validate();
  mp.validate();
  fee.validate();
  grid.validate(mp);

  ValueGrid vg;
  vg.pool = pool;
  vg.grid = grid;
  const Eigen::VectorXd nodes = grid.s_nodes();
  const JumpCoefficients jc(pool, mp, fee, nodes);
  const double dt = grid.dt(mp);
  const double lam = jc.max_intensity();
  vg.diagnostics.max_intensity = lam;
  int substeps = 1;
  if (dt * lam > 0.5) {
    if (dt * lam / 0.5 > 1e5)
      throw std::runtime_error("pde: max intensity " + std::to_string(lam) +
                               " needs more than 1e5 substeps per step; narrow the reserve "
                               "bounds or the S grid");
    substeps = static_cast<int>(std::ceil(dt * lam / 0.5));
    vg.diagnostics.notes.push_back("dt * max intensity = " + std::to_string(dt * lam) +
                                   " > 0.5; each step split into " + std::to_string(substeps) +
                                   " substeps");
  }
  vg.diagnostics.substeps = substeps;
  const double h = dt / substeps;
  const double a = h * 0.5 * mp.sigma * mp.sigma / (grid.ds() * grid.ds());
  const NeumannSolver solver(grid.n_s + 1, a);
  const ObstacleSolver obstacle(grid.n_s + 1, a);
  const bool implicit_obstacle = grid.obstacle == ObstacleMode::implicit;

  const int ny = pool.lattice_size();
  Slice v = Slice::Zero(ny, grid.n_s + 1);
  SliceMask mask = SliceMask::Constant(ny, grid.n_s + 1, true);

  std::vector<int> idx{grid.n_t};
  std::vector<Slice> vals{v};
  std::vector<SliceMask> masks{mask};
  for (int k = grid.n_t - 1; k >= 0; --k) {
    for (int sub = 0; sub < substeps; ++sub) {
      Slice w = explicit_part(v, jc, h, vg.diagnostics);
      if (implicit_obstacle) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) obstacle.apply(w.row(r), mask.row(r));
        v = std::move(w);
      } else {
        for (Eigen::Index r = 0; r < w.rows(); ++r) solver.apply(w.row(r));
        mask = (w.array() <= 0.0).matrix();
        v = w.cwiseMax(0.0);
      }
    }
    if (k % grid.record_stride == 0) {
      idx.push_back(k);
      vals.push_back(v);
      masks.push_back(mask);
    }
  }
  for (std::size_t l = idx.size(); l-- > 0;) {
    vg.t_index.push_back(idx[l]);
    vg.times.push_back(mp.horizon_T * idx[l] / grid.n_t);
    vg.values.push_back(std::move(vals[l]));
    vg.exercise.push_back(std::move(masks[l]));
  }
  return vg;
}
}  // namespace

ValueGrid solve_qvi(const PoolConfig& pool, const MarketParams& mp, const FeeSchedule& fee,
                    const GridSpec& grid) {
  return march(pool, mp, fee, grid,
               [](const Slice& v, const JumpCoefficients& jc, double h, SolverDiagnostics&) {
                 return jump_step(v, jc, h);
               });
}

ValueGrid solve_qvi_risk_averse(const PoolConfig& pool, const MarketParams& mp,
                                const FeeSchedule& fee, const GridSpec& grid,
                                const RiskAversion& ra) {
  ra.validate();
  const double ds = grid.ds();
  ValueGrid vg = march(
      pool, mp, fee, grid,
      [&](const Slice& v, const JumpCoefficients& jc, double h, SolverDiagnostics& diag) {
        return jump_step_risk_averse(v, jc, h, ra.psi, mp.sigma, ds, &diag.exp_clamps);
      });
  if (vg.diagnostics.exp_clamps > 0)
    vg.diagnostics.notes.push_back("exponent clamped at +-700 on " +
                                   std::to_string(vg.diagnostics.exp_clamps) + " evaluations");
  return vg;
}

ResidualReport qvi_residual(const ValueGrid& vg, const MarketParams& mp, const FeeSchedule& fee) {
  if (vg.grid.record_stride != 1)
    throw std::invalid_argument("qvi_residual needs every time level (record_stride == 1)");
  const JumpCoefficients jc(vg.pool, mp, fee, vg.grid.s_nodes());
  const double dt = vg.grid.dt(mp);
  const double ds = vg.grid.ds();
  const double half_var = 0.5 * mp.sigma * mp.sigma;

  ResidualReport rep;
  rep.terminal_zero = (vg.values.back().array() == 0.0).all();
  double vmax = 0;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (const auto& v : vg.values) {
    vmax = std::max(vmax, v.cwiseAbs().maxCoeff());
    rep.min_value = std::min(rep.min_value, v.minCoeff());
  }
  rep.scale = std::max(vmax / mp.horizon_T, std::numeric_limits<double>::min());

  for (int l = 0; l + 1 < vg.n_levels(); ++l) {
    const Slice& now = vg.values[l];
    const Slice& next = vg.values[l + 1];
    // Jump part was taken explicitly at the later level.
    const Slice jump = (jump_step(next, jc, dt) - next) / dt;
    for (Eigen::Index r = 0; r < now.rows(); ++r) {
      for (Eigen::Index j = 1; j + 1 < now.cols(); ++j) {
        const double d2 = (now(r, j + 1) - 2.0 * now(r, j) + now(r, j - 1)) / (ds * ds);
        const double cont = -(next(r, j) - now(r, j)) / dt - half_var * d2 - jump(r, j);
        rep.max_abs = std::max(rep.max_abs, std::abs(std::min(cont, now(r, j))));
      }
    }
  }
  rep.max_scaled = rep.max_abs / rep.scale;
  return rep;
}

double PolicySurface::hold_length(int level, int y_row) const {
  double total = 0;
  for (const auto& iv : continuation[level][y_row]) total += iv.hi - iv.lo;
  return total;
}

PolicySurface extract_policy(const ValueGrid& vg) {
  PolicySurface ps;
  ps.times = vg.times;
  for (int r = 0; r < vg.n_y(); ++r) ps.reserves.push_back(vg.pool.lattice_value(r));
  const Eigen::VectorXd nodes = vg.grid.s_nodes();
  for (int l = 0; l < vg.n_levels(); ++l) {
    std::vector<std::vector<Interval>> per_y(vg.n_y());
    const SliceMask& ex = vg.exercise[l];
    for (int r = 0; r < vg.n_y(); ++r) {
      int j = 0;
      const int ns = static_cast<int>(ex.cols());
      while (j < ns) {
        if (ex(r, j)) {
          ++j;
          continue;
        }
        const int start = j;
        while (j < ns && !ex(r, j)) ++j;
        per_y[r].push_back({nodes(start), nodes(j - 1)});
      }
    }
    ps.continuation.push_back(std::move(per_y));
  }
  return ps;
}

std::vector<SliceRow> slice_at_time(const ValueGrid& vg, int level) {
  std::vector<SliceRow> rows;
  const Eigen::VectorXd nodes = vg.grid.s_nodes();
  for (int r = 0; r < vg.n_y(); ++r)
    for (int j = 0; j < nodes.size(); ++j)
      rows.push_back({vg.times[level], vg.pool.lattice_value(r), nodes(j), vg.values[level](r, j),
                      vg.exercise[level](r, j)});
  return rows;
}

std::vector<SliceRow> slice_at_reserve(const ValueGrid& vg, double y) {
  const int r = vg.pool.lattice_index(y);
  std::vector<SliceRow> rows;
  const Eigen::VectorXd nodes = vg.grid.s_nodes();
  for (int l = 0; l < vg.n_levels(); ++l)
    for (int j = 0; j < nodes.size(); ++j)
      rows.push_back({vg.times[l], y, nodes(j), vg.values[l](r, j), vg.exercise[l](r, j)});
  return rows;
}

}  // namespace lpexit
