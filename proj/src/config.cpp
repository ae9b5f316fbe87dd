#include "lpexit/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "lpexit/io.hpp"

namespace lpexit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw std::invalid_argument("config: key '" + key + "': cannot read '" + value + "' as " +
                              expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "a finite real");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long out = to_integer(key, v);
  if (out < -2147483647LL || out > 2147483647LL) bad_value(key, v, "a 32-bit integer");
  return static_cast<int>(out);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean (true|false)");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    // "1/3" style fractions are accepted for readability
    const auto slash = item.find('/');
    if (slash != std::string::npos) {
      const double num = to_double(key, trim(item.substr(0, slash)));
      const double den = to_double(key, trim(item.substr(slash + 1)));
      if (den == 0) bad_value(key, v, "a list of reals");
      out.push_back(num / den);
    } else {
      out.push_back(to_double(key, item));
    }
  }
  if (out.empty()) bad_value(key, v, "a nonempty comma-separated list");
  return out;
}

// Reserves are stored as (x0, y0); depth follows them.
void refresh_depth(PoolConfig& p) { p.depth_c = p.x0 * p.y0; }

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"preset", [](RunConfig&, const std::string&, const std::string&) {}},
      {"profile",
       [](RunConfig& c, const std::string&, const std::string& v) { c.profile = parse_profile(v); }},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},

      {"pool.x0", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pool.x0 = to_double(k, v);
         refresh_depth(c.pool);
       }},
      {"pool.y0", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pool.y0 = to_double(k, v);
         refresh_depth(c.pool);
       }},
      {"pool.xi", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pool.trade_size_xi = to_double(k, v);
       }},
      {"pool.y_lower", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pool.y_lower = to_double(k, v);
       }},
      {"pool.y_upper", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pool.y_upper = to_double(k, v);
       }},

      {"market.sigma", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.sigma = to_double(k, v);
       }},
      {"market.s0", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.s0 = to_double(k, v);
       }},
      {"market.a0", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.a0 = to_double(k, v);
       }},
      {"market.a1", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.a1 = to_double(k, v);
       }},
      {"market.a2", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.a2 = to_double(k, v);
       }},
      {"market.T", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.market.horizon_T = to_double(k, v);
       }},

      {"fee.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "constant") c.fee.kind = FeeSchedule::Kind::constant;
         else if (v == "linear") c.fee.kind = FeeSchedule::Kind::linear;
         else bad_value(k, v, "constant|linear");
       }},
      {"fee.level", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.fee.intercept = to_double(k, v);
       }},
      {"fee.slope", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.fee.slope = to_double(k, v);
       }},

      {"sim.n_steps", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sim.n_steps = to_int(k, v);
       }},
      {"sim.n_paths", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sim.n_paths = to_int(k, v);
       }},
      {"sim.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sim.seed = to_u64(k, v);
       }},
      {"sim.increment", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "gaussian") c.sim.increment = IncrementKind::gaussian;
         else if (v == "binomial") c.sim.increment = IncrementKind::binomial;
         else bad_value(k, v, "gaussian|binomial");
       }},

      {"lsmc.degree", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lsmc.degree = to_int(k, v);
       }},
      {"lsmc.ridge", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lsmc.ridge = to_double(k, v);
       }},
      {"lsmc.standardize", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lsmc.standardize = to_bool(k, v);
       }},
      {"lsmc.regress_all_paths", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lsmc.regress_all_paths = to_bool(k, v);
       }},

      {"grid.s_min", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.s_min = to_double(k, v);
         c.grid_explicit_bounds = true;
       }},
      {"grid.s_max", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.s_max = to_double(k, v);
         c.grid_explicit_bounds = true;
       }},
      {"grid.width", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid_width = to_double(k, v);
       }},
      {"grid.n_s", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.n_s = to_int(k, v);
       }},
      {"grid.n_t", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.n_t = to_int(k, v);
       }},
      {"grid.record_stride", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.record_stride = to_int(k, v);
       }},
      {"grid.obstacle", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "implicit") c.grid.obstacle = ObstacleMode::implicit;
         else if (v == "projection") c.grid.obstacle = ObstacleMode::projection;
         else throw std::invalid_argument("config: " + k + " must be implicit or projection");
       }},

      {"risk.psi", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "none") c.risk.reset();
         else c.risk = RiskAversion{to_double(k, v)};
       }},

      {"sweep.target", [](RunConfig& c, const std::string&, const std::string& v) {
         c.sweep_target = parse_override_target(v);
       }},
      {"sweep.factors", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sweep_factors = to_list(k, v);
       }},
      {"sweep.seeds", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "independent") c.sweep_seeds = SeedPolicy::independent;
         else if (v == "common") c.sweep_seeds = SeedPolicy::common;
         else bad_value(k, v, "independent|common");
       }},

      {"export.paths_csv", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.paths_csv = to_bool(k, v);
       }},
      {"export.step_stride", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.step_stride = to_int(k, v);
       }},
      {"export.max_paths", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.max_paths = to_int(k, v);
       }},
      {"export.binary_bundle", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.binary_bundle = to_bool(k, v);
       }},
      {"export.quantile_lo", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.quantile_lo = to_double(k, v);
       }},
      {"export.quantile_hi", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.quantile_hi = to_double(k, v);
       }},
      {"export.histogram_bins", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.histogram_bins = to_int(k, v);
       }},
      {"export.grid_y_stride", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.exports.grid_y_stride = to_int(k, v);
       }},
  };
  return table;
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "paper") return Profile::paper;
  if (name == "desk") return Profile::desk;
  throw std::invalid_argument("config: key 'profile': unknown profile '" + name +
                              "' (paper|desk)");
}

const char* to_string(Profile p) { return p == Profile::desk ? "desk" : "paper"; }

ConfigEntries parse_entries(const std::string& text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(number) +
                                  ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: line " + std::to_string(number) +
                                  ": empty key or value");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "paper-toy") {
    c.pool = PoolConfig::from_reserves(1000.0, 1000.0, 1.0, 500.0, 1500.0);
    c.market = {100.0, 1.0, 4.0, 8.0, 0.04, 1.0};  // S0 = Z0 = c / Y0^2
    c.fee = FeeSchedule::constant(10.0);
    c.sim.n_steps = 1440;
    c.sim.n_paths = 5000;
    c.lsmc.degree = 3;
    c.grid.n_s = 400;
    c.grid.n_t = 400;
    c.grid.record_stride = 10;
    c.exports.grid_y_stride = 10;
  } else if (name == "paper-calibrated") {
    const double s0 = 2820.0, y0 = 50000.0, xi = 100.0;
    c.pool = PoolConfig::from_reserves(y0 * s0, y0, xi, xi, 4.0 * y0);
    c.market = {0.0569 * s0, s0, 1.0, 10.0, 10.0, 1.0};
    c.fee = FeeSchedule::constant(0.01 * xi * s0);
    c.sim.n_steps = 1440;
    c.sim.n_paths = 10000;
    c.lsmc.degree = 3;
    // The full reserve range makes the jump terms extremely stiff; pde runs
    // on this preset should narrow pool.y_lower / pool.y_upper.
    c.grid.n_s = 400;
    c.grid.n_t = 400;
    c.grid.record_stride = 10;
    c.exports.grid_y_stride = 20;
  } else {
    throw std::invalid_argument("config: key 'preset': unknown preset '" + name +
                                "' (paper-toy|paper-calibrated)");
  }
  c.sim.seed = kDefaultSeed;
  return c;
}

void apply_profile(RunConfig& cfg, Profile profile) {
  cfg.profile = profile;
  if (profile == Profile::desk) cfg.sim.n_paths = 2000;
}

void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second(cfg, key, value);
}

GridSpec RunConfig::resolved_grid() const {
  if (grid_explicit_bounds) return grid;
  GridSpec g = GridSpec::centred(market, grid.n_s, grid.n_t, grid_width);
  g.record_stride = grid.record_stride;
  g.obstacle = grid.obstacle;
  return g;
}

void RunConfig::validate() const {
  pool.validate();
  market.validate();
  fee.validate();
  sim.validate();
  lsmc.validate(sim.n_paths);
  resolved_grid().validate(market);
  if (risk) risk->validate();
  if (output_dir.empty()) throw std::invalid_argument("config: key 'output.dir': must be set");
  for (double f : sweep_factors)
    Scenario{"", model(), sweep_target, f}.validate();
  if (!(exports.quantile_lo > 0 && exports.quantile_lo < exports.quantile_hi &&
        exports.quantile_hi < 1))
    throw std::invalid_argument("config: export quantiles need 0 < lo < hi < 1");
  if (exports.step_stride < 1 || exports.grid_y_stride < 1 || exports.histogram_bins < 1)
    throw std::invalid_argument("config: export strides and bin counts must be >= 1");
}

RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  const ConfigEntries entries = parse_entries(text);

  std::string preset = "paper-toy";
  std::optional<Profile> profile;
  for (const auto& [k, v] : entries) {
    if (k == "preset") preset = v;
    if (k == "profile") profile = parse_profile(v);
  }
  if (overrides.preset) preset = *overrides.preset;
  if (overrides.profile) profile = overrides.profile;

  RunConfig cfg = preset_config(preset);
  if (profile) apply_profile(cfg, *profile);
  for (const auto& [k, v] : entries) {
    if (k == "profile") continue;
    apply_entry(cfg, k, v);
  }
  for (const auto& [k, v] : overrides.entries) {
    if (k == "preset" || k == "profile")
      throw std::invalid_argument("config: key '" + k + "' cannot be overridden with --set");
    apply_entry(cfg, k, v);
  }
  if (overrides.seed) cfg.sim.seed = *overrides.seed;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (overrides.psi) cfg.risk = RiskAversion{*overrides.psi};
  cfg.validate();
  return cfg;
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  auto put = [&](const char* key, const std::string& v) { os << key << " = " << v << '\n'; };
  auto num = [&](const char* key, double v) { put(key, fmt_double(v)); };
  put("preset", c.preset);
  put("profile", to_string(c.profile));
  put("output.dir", c.output_dir);
  num("pool.x0", c.pool.x0);
  num("pool.y0", c.pool.y0);
  num("pool.xi", c.pool.trade_size_xi);
  num("pool.y_lower", c.pool.y_lower);
  num("pool.y_upper", c.pool.y_upper);
  num("market.sigma", c.market.sigma);
  num("market.s0", c.market.s0);
  num("market.a0", c.market.a0);
  num("market.a1", c.market.a1);
  num("market.a2", c.market.a2);
  num("market.T", c.market.horizon_T);
  put("fee.kind", c.fee.kind == FeeSchedule::Kind::linear ? "linear" : "constant");
  num("fee.level", c.fee.intercept);
  num("fee.slope", c.fee.slope);
  put("sim.n_steps", std::to_string(c.sim.n_steps));
  put("sim.n_paths", std::to_string(c.sim.n_paths));
  put("sim.seed", std::to_string(c.sim.seed));
  put("sim.increment", c.sim.increment == IncrementKind::binomial ? "binomial" : "gaussian");
  put("lsmc.degree", std::to_string(c.lsmc.degree));
  num("lsmc.ridge", c.lsmc.ridge);
  put("lsmc.standardize", c.lsmc.standardize ? "true" : "false");
  put("lsmc.regress_all_paths", c.lsmc.regress_all_paths ? "true" : "false");
  if (c.grid_explicit_bounds) {
    num("grid.s_min", c.grid.s_min);
    num("grid.s_max", c.grid.s_max);
  }
  num("grid.width", c.grid_width);
  put("grid.n_s", std::to_string(c.grid.n_s));
  put("grid.n_t", std::to_string(c.grid.n_t));
  put("grid.record_stride", std::to_string(c.grid.record_stride));
  put("grid.obstacle", c.grid.obstacle == ObstacleMode::implicit ? "implicit" : "projection");
  put("risk.psi", c.risk ? fmt_double(c.risk->psi) : "none");
  put("sweep.target", to_string(c.sweep_target));
  std::string factors;
  for (std::size_t i = 0; i < c.sweep_factors.size(); ++i)
    factors += (i ? "," : "") + fmt_double(c.sweep_factors[i]);
  put("sweep.factors", factors);
  put("sweep.seeds", c.sweep_seeds == SeedPolicy::common ? "common" : "independent");
  put("export.paths_csv", c.exports.paths_csv ? "true" : "false");
  put("export.step_stride", std::to_string(c.exports.step_stride));
  put("export.max_paths", std::to_string(c.exports.max_paths));
  put("export.binary_bundle", c.exports.binary_bundle ? "true" : "false");
  num("export.quantile_lo", c.exports.quantile_lo);
  num("export.quantile_hi", c.exports.quantile_hi);
  put("export.histogram_bins", std::to_string(c.exports.histogram_bins));
  put("export.grid_y_stride", std::to_string(c.exports.grid_y_stride));
  return os.str();
}

}  // namespace lpexit
