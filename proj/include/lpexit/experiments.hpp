#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lpexit/lsmc.hpp"
#include "lpexit/model.hpp"
#include "lpexit/simulate.hpp"

namespace lpexit {

/// Everything needed for one simulate + LSMC run.
struct ModelSetup {
  PoolConfig pool;
  MarketParams market;
  FeeSchedule fee;
  SimConfig sim;
  LsmcConfig lsmc;
};

enum class OverrideTarget { none, sigma, fee, a1, a2 };

const char* to_string(OverrideTarget target);
OverrideTarget parse_override_target(const std::string& name);

struct Scenario {
  std::string label;
  ModelSetup base;
  OverrideTarget target = OverrideTarget::none;
  double factor = 1.0;

  /// Base setup with the multiplier applied; throws if the result is invalid.
  ModelSetup applied() const;
  void validate() const;
};

/// Label in the style "sigma/5", "sigma", "2 sigma".
std::string multiplier_label(OverrideTarget target, double factor);

std::vector<Scenario> multiplier_scenarios(const ModelSetup& base, OverrideTarget target,
                                           const std::vector<double>& factors);

struct SweepRow {
  std::string label;
  double factor = 1.0;
  double mean_tau = 0, std_tau = 0;
  double mean_R = 0, std_R = 0;
  double mean_IL = 0, std_IL = 0;
  double mean_perf = 0, std_perf = 0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
  double se_perf() const;
  double se_R() const;
  double se_IL() const;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

enum class SeedPolicy {
  common,       // every scenario reuses the base seed (common random numbers)
  independent,  // scenario k uses a seed derived from (base seed, k)
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// simulate -> backward_induct -> exit_statistics per scenario. A failing
/// scenario yields a row carrying the error; the others still run.
SweepReport run_sweep(const std::vector<Scenario>& scenarios,
                      SeedPolicy policy = SeedPolicy::common);

struct PerformancePoint {
  double multiplier = 0;
  double mean_perf = 0;
  double std_perf = 0;
  double se_perf = 0;
};

/// E[R_tau - IL_tau] against fee multipliers (0 allowed: no fee income).
std::vector<PerformancePoint> performance_curve(const ModelSetup& base,
                                                const std::vector<double>& fee_multipliers,
                                                SeedPolicy policy = SeedPolicy::common);

struct ExitPoint {
  int path = 0;
  double tau = 0;
  double s_tau = 0;
  double perf_tau = 0;
};

std::vector<ExitPoint> exit_scatter(const PathBundle& bundle, const LsmcResult& result);

void write_sweep_csv(std::ostream& os, const SweepReport& report);
/// Aligned text table with one "mean (std)" cell per statistic.
void render_sweep_table(std::ostream& os, const SweepReport& report, const std::string& heading);

}  // namespace lpexit
