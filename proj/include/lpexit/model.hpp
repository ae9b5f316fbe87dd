#pragma once

// Constant-product pool mechanics, taker intensities, fees and impermanent
// loss. Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpexit {

/// Pool geometry: depth c = x0 * y0, trade size xi and the reserve lattice
/// Q = {y_lower, y_lower + xi, ..., y_upper}. Lattice points are addressed by
/// integer index so membership is exact.
template <typename Scalar>
struct PoolConfigT {
  Scalar depth_c{};
  Scalar trade_size_xi{};
  Scalar y_lower{};
  Scalar y_upper{};
  Scalar y0{};
  Scalar x0{};

  /// Builds a pool from its initial reserves; depth_c is fixed here once.
  static PoolConfigT from_reserves(Scalar x0, Scalar y0, Scalar xi, Scalar y_lower,
                                   Scalar y_upper) {
    PoolConfigT cfg{x0 * y0, xi, y_lower, y_upper, y0, x0};
    cfg.validate();
    return cfg;
  }

  /// Same depth, reserves re-anchored at lattice point y_start.
  PoolConfigT recentred(Scalar y_start) const {
    PoolConfigT cfg = *this;
    cfg.y0 = lattice_value(lattice_index(y_start));
    cfg.x0 = depth_c / cfg.y0;
    return cfg;
  }

  int lattice_size() const {
    return static_cast<int>(std::llround((y_upper - y_lower) / trade_size_xi)) + 1;
  }

  Scalar lattice_value(int index) const {
    return y_lower + static_cast<Scalar>(index) * trade_size_xi;
  }

  bool on_lattice(Scalar y) const {
    const Scalar k = (y - y_lower) / trade_size_xi;
    const Scalar nearest = std::round(k);
    return std::abs(k - nearest) <= Scalar(1e-9) * std::max(Scalar(1), std::abs(k)) &&
           nearest >= 0 && nearest <= static_cast<Scalar>(lattice_size() - 1);
  }

  /// Index of y in Q; throws std::domain_error when y is not a lattice point.
  int lattice_index(Scalar y) const {
    if (!on_lattice(y)) {
      throw std::domain_error("reserve " + std::to_string(static_cast<double>(y)) +
                              " is not a point of the reserve lattice");
    }
    return static_cast<int>(std::llround((y - y_lower) / trade_size_xi));
  }

  int y0_index() const { return lattice_index(y0); }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("pool: " + what); };
    if (!(depth_c > 0)) fail("depth_c must be positive");
    if (!(trade_size_xi > 0)) fail("trade_size_xi must be positive");
    if (!(y_lower > 0 && y_lower < y_upper && std::isfinite(y_upper)))
      fail("require 0 < y_lower < y_upper < inf");
    auto multiple = [&](Scalar v) {
      const Scalar k = v / trade_size_xi;
      return std::abs(k - std::round(k)) <= Scalar(1e-9) * std::max(Scalar(1), std::abs(k));
    };
    if (!multiple(y_lower) || !multiple(y_upper) || !multiple(y0))
      fail("y_lower, y_upper and y0 must be multiples of trade_size_xi");
    if (!(y_lower <= y0 && y0 <= y_upper)) fail("require y_lower <= y0 <= y_upper");
    if (!(x0 > 0)) fail("x0 must be positive");
    if (std::abs(x0 * y0 - depth_c) > Scalar(1e-12) * depth_c)
      fail("x0 * y0 must equal depth_c");
  }
};

template <typename Scalar>
struct MarketParamsT {
  Scalar sigma{};
  Scalar s0{};
  Scalar a0{};
  Scalar a1{};
  Scalar a2{};
  Scalar horizon_T{1};

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("market: " + what); };
    if (!(sigma > 0)) fail("sigma must be positive");
    if (!(horizon_T > 0)) fail("horizon_T must be positive");
    if (!(a0 > 0)) fail("a0 must be positive");
    if (!(a1 >= 0)) fail("a1 must be nonnegative");
    if (!(a2 >= 0)) fail("a2 must be nonnegative");
    if (!std::isfinite(s0)) fail("s0 must be finite");
  }
};

/// Fee paid to the pool per executed taker trade, as a function of the
/// pre-trade reserve y. Denominated in X.
template <typename Scalar>
struct FeeScheduleT {
  enum class Kind { constant, linear };

  Kind kind{Kind::constant};
  Scalar intercept{};
  Scalar slope{};

  static FeeScheduleT constant(Scalar level) { return {Kind::constant, level, Scalar(0)}; }
  static FeeScheduleT linear(Scalar intercept, Scalar slope) {
    return {Kind::linear, intercept, slope};
  }

  Scalar operator()(Scalar y) const {
    return kind == Kind::constant ? intercept : intercept + slope * y;
  }

  FeeScheduleT scaled(Scalar factor) const { return {kind, intercept * factor, slope * factor}; }

  void validate() const {
    if (!std::isfinite(intercept) || !std::isfinite(slope) || intercept < 0 || slope < 0)
      throw std::invalid_argument("fee: coefficients must be finite and nonnegative");
  }
};

/// Snapshot of the pool and the LP's running accounts.
template <typename Scalar>
struct PoolStateT {
  Scalar x{};
  Scalar y{};
  Scalar z{};
  Scalar s{};
  Scalar fees_accrued_R{};
  Scalar px{};
  Scalar py{};
};

using PoolConfig = PoolConfigT<double>;
using MarketParams = MarketParamsT<double>;
using FeeSchedule = FeeScheduleT<double>;
using PoolState = PoolStateT<double>;

namespace detail {
template <typename Scalar>
void require_positive_reserve(Scalar y) {
  if (!(y > 0)) throw std::domain_error("reserve must be positive");
}
}  // namespace detail

/// phi_c(y) = c / y.
template <typename Scalar>
Scalar level_curve(const PoolConfigT<Scalar>& cfg, Scalar y) {
  detail::require_positive_reserve(y);
  return cfg.depth_c / y;
}

/// Z = c / y^2.
template <typename Scalar>
Scalar marginal_price(const PoolConfigT<Scalar>& cfg, Scalar y) {
  detail::require_positive_reserve(y);
  return cfg.depth_c / (y * y);
}

template <typename Scalar>
bool admissible_buy(const PoolConfigT<Scalar>& cfg, Scalar y) {
  return cfg.lattice_index(y) + 1 < cfg.lattice_size();
}

template <typename Scalar>
bool admissible_sell(const PoolConfigT<Scalar>& cfg, Scalar y) {
  return cfg.lattice_index(y) > 0;
}

// Index-based kernels. Callers guarantee 0 <= index < lattice_size(); these
// are the hot-loop entry points for the simulator and the grid solver.

template <typename Scalar>
Scalar beta_buy_at(const PoolConfigT<Scalar>& cfg, const FeeScheduleT<Scalar>& fee, int index,
                   Scalar s) {
  const Scalar y = cfg.lattice_value(index);
  return cfg.depth_c / (y + cfg.trade_size_xi) - cfg.depth_c / y + cfg.trade_size_xi * s + fee(y);
}

template <typename Scalar>
Scalar beta_sell_at(const PoolConfigT<Scalar>& cfg, const FeeScheduleT<Scalar>& fee, int index,
                    Scalar s) {
  const Scalar y = cfg.lattice_value(index);
  return cfg.depth_c / (y - cfg.trade_size_xi) - cfg.depth_c / y - cfg.trade_size_xi * s + fee(y);
}

/// max{a0, a1 + a2 (c/y^2 - s)}: takers adding Y to the pool.
template <typename Scalar>
Scalar intensity_buy_at(const MarketParamsT<Scalar>& mp, const PoolConfigT<Scalar>& cfg,
                        Scalar y, Scalar s) {
  return std::max(mp.a0, mp.a1 + mp.a2 * (cfg.depth_c / (y * y) - s));
}

/// max{a0, a1 + a2 (s - c/y^2)}: takers removing Y from the pool.
template <typename Scalar>
Scalar intensity_sell_at(const MarketParamsT<Scalar>& mp, const PoolConfigT<Scalar>& cfg,
                         Scalar y, Scalar s) {
  return std::max(mp.a0, mp.a1 + mp.a2 * (s - cfg.depth_c / (y * y)));
}

/// Increment of -IL + R when a taker adds xi units of Y at reserve y.
template <typename Scalar>
Scalar beta_buy(const PoolConfigT<Scalar>& cfg, const FeeScheduleT<Scalar>& fee, Scalar y,
                Scalar s) {
  return beta_buy_at(cfg, fee, cfg.lattice_index(y), s);
}

/// Increment of -IL + R when a taker removes xi units of Y at reserve y.
template <typename Scalar>
Scalar beta_sell(const PoolConfigT<Scalar>& cfg, const FeeScheduleT<Scalar>& fee, Scalar y,
                 Scalar s) {
  const int index = cfg.lattice_index(y);
  if (!(y - cfg.trade_size_xi > 0)) throw std::domain_error("sell would empty the pool");
  return beta_sell_at(cfg, fee, index, s);
}

template <typename Scalar>
Scalar intensity_buy(const MarketParamsT<Scalar>& mp, const PoolConfigT<Scalar>& cfg, Scalar y,
                     Scalar s) {
  cfg.lattice_index(y);
  return intensity_buy_at(mp, cfg, y, s);
}

template <typename Scalar>
Scalar intensity_sell(const MarketParamsT<Scalar>& mp, const PoolConfigT<Scalar>& cfg, Scalar y,
                      Scalar s) {
  cfg.lattice_index(y);
  return intensity_sell_at(mp, cfg, y, s);
}

/// IL = -(P^X + S P^Y).
template <typename Scalar>
Scalar impermanent_loss(const PoolStateT<Scalar>& state) {
  return -(state.px + state.s * state.py);
}

template <typename Scalar>
Scalar impermanent_loss(const PoolStateT<Scalar>& state, const PoolConfigT<Scalar>&) {
  return impermanent_loss(state);
}

template <typename Scalar>
PoolStateT<Scalar> initial_state(const PoolConfigT<Scalar>& cfg, Scalar s) {
  return {cfg.x0, cfg.y0, marginal_price(cfg, cfg.y0), s, Scalar(0), Scalar(0), Scalar(0)};
}

/// Executes one taker trade that adds xi of Y. Returns false, leaving the
/// state untouched, when the upper reserve bound forbids it.
template <typename Scalar>
bool apply_buy(PoolStateT<Scalar>& st, const PoolConfigT<Scalar>& cfg,
               const FeeScheduleT<Scalar>& fee) {
  const int index = cfg.lattice_index(st.y);
  if (index + 1 >= cfg.lattice_size()) return false;
  const Scalar fee_paid = fee(st.y);
  st.y = cfg.lattice_value(index + 1);
  st.x = cfg.depth_c / st.y;
  st.z = marginal_price(cfg, st.y);
  st.px = st.x - cfg.x0;
  st.py = st.y - cfg.y0;
  st.fees_accrued_R += fee_paid;
  return true;
}

/// Executes one taker trade that removes xi of Y.
template <typename Scalar>
bool apply_sell(PoolStateT<Scalar>& st, const PoolConfigT<Scalar>& cfg,
                const FeeScheduleT<Scalar>& fee) {
  const int index = cfg.lattice_index(st.y);
  if (index <= 0) return false;
  const Scalar fee_paid = fee(st.y);
  st.y = cfg.lattice_value(index - 1);
  st.x = cfg.depth_c / st.y;
  st.z = marginal_price(cfg, st.y);
  st.px = st.x - cfg.x0;
  st.py = st.y - cfg.y0;
  st.fees_accrued_R += fee_paid;
  return true;
}

}  // namespace lpexit
