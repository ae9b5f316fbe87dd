#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpexit/experiments.hpp"
#include "lpexit/lsmc.hpp"
#include "lpexit/model.hpp"
#include "lpexit/pde.hpp"
#include "lpexit/simulate.hpp"

namespace lpexit {

/// Fixed default seed used whenever none is given.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

enum class Profile { paper, desk };

struct ExportOptions {
  bool paths_csv = true;
  int step_stride = 10;
  int max_paths = 100;
  bool binary_bundle = false;
  double quantile_lo = 0.05;
  double quantile_hi = 0.95;
  int histogram_bins = 50;
  int grid_y_stride = 1;  // ValueGrid CSV keeps every k-th reserve level
};

/// Fully resolved run configuration.
struct RunConfig {
  std::string preset = "paper-toy";
  Profile profile = Profile::paper;
  PoolConfig pool;
  MarketParams market;
  FeeSchedule fee;
  SimConfig sim;
  LsmcConfig lsmc;
  GridSpec grid;
  double grid_width = 5.0;  // used when the S bounds are not given explicitly
  bool grid_explicit_bounds = false;
  std::optional<RiskAversion> risk;
  std::string output_dir = "out";
  OverrideTarget sweep_target = OverrideTarget::sigma;
  std::vector<double> sweep_factors{0.2, 0.25, 1.0 / 3.0, 0.5, 1, 2, 3, 4, 5};
  SeedPolicy sweep_seeds = SeedPolicy::common;
  ExportOptions exports;

  ModelSetup model() const { return {pool, market, fee, sim, lsmc}; }
  /// Grid actually used by the solver (centred bounds unless given).
  GridSpec resolved_grid() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Ordered key/value pairs of a configuration document.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Splits `key = value` lines; '#' starts a comment. Malformed lines throw
/// std::invalid_argument with the line number.
ConfigEntries parse_entries(const std::string& text);

RunConfig preset_config(const std::string& name);
void apply_profile(RunConfig& cfg, Profile profile);
/// Applies one key; unknown keys and unparsable values throw naming the key.
void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value);

struct ConfigOverrides {
  std::optional<std::string> preset;
  std::optional<Profile> profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<double> psi;
  /// Extra key/value pairs applied after the document (e.g. from --set).
  ConfigEntries entries;
};

/// preset < profile < document < overrides; the result is validated.
RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});

/// Canonical document that parse_config maps back to the same RunConfig.
std::string to_config_text(const RunConfig& cfg);

Profile parse_profile(const std::string& name);
const char* to_string(Profile p);

}  // namespace lpexit
