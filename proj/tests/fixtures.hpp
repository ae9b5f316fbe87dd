#pragma once

#include "lpexit/experiments.hpp"
#include "lpexit/model.hpp"

namespace fixture {

/// Small pool with the toy preset's shape, sized for fast tests.
inline lpexit::ModelSetup small_setup(int n_paths = 2000, int n_steps = 100) {
  lpexit::ModelSetup s;
  s.pool = lpexit::PoolConfig::from_reserves(1000, 1000, 1, 950, 1050);
  s.market = {100.0, 1.0, 4.0, 8.0, 0.04, 1.0};
  s.fee = lpexit::FeeSchedule::constant(10.0);
  s.sim.n_paths = n_paths;
  s.sim.n_steps = n_steps;
  s.sim.seed = 11;
  s.lsmc.degree = 3;
  return s;
}

/// Three reserve levels around y = 10 with unit trades.
inline lpexit::ModelSetup tiny_setup() {
  lpexit::ModelSetup s;
  s.pool = lpexit::PoolConfig::from_reserves(10, 10, 1, 9, 11);
  s.market = {0.3, 1.0, 0.5, 1.0, 2.0, 1.0};
  s.fee = lpexit::FeeSchedule::constant(0.1);
  s.sim.n_steps = 4;
  s.sim.increment = lpexit::IncrementKind::binomial;
  s.lsmc.degree = 5;
  return s;
}

}  // namespace fixture
