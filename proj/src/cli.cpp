#include "lpexit/cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "lpexit/experiments.hpp"
#include "lpexit/io.hpp"
#include "lpexit/lsmc.hpp"
#include "lpexit/pde.hpp"
#include "lpexit/simulate.hpp"

namespace lpexit {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "lsmc", "pde", "sweep"};
  return names;
}

namespace {

/// Tracks the files a run produces so the manifest can list them.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body,
             bool binary = false) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    files_.push_back(name);
    body(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + path.string());
  }

  void write_text(const std::string& name, const std::string& text) {
    write(name, [&](std::ostream& os) { os << text << '\n'; });
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void run_simulate(const RunConfig& cfg, Artifacts& art, nlohmann::ordered_json& info) {
  const PathBundle b = simulate(cfg.pool, cfg.market, cfg.fee, cfg.sim);
  info["saturated_steps"] = b.saturated_steps;
  if (cfg.exports.paths_csv)
    art.write("paths.csv", [&](std::ostream& os) {
      write_paths_csv(os, b, {cfg.exports.step_stride, cfg.exports.max_paths});
    });
  art.write("quantiles.csv", [&](std::ostream& os) {
    write_quantiles_csv(os, b, path_quantiles(b, cfg.exports.quantile_lo, cfg.exports.quantile_hi));
  });
  if (cfg.exports.binary_bundle)
    art.write("bundle.bin", [&](std::ostream& os) { write_bundle(os, b); }, true);
}

void run_lsmc(const RunConfig& cfg, Artifacts& art, nlohmann::ordered_json& info) {
  const PathBundle b = simulate(cfg.pool, cfg.market, cfg.fee, cfg.sim);
  const LsmcResult res = backward_induct(b, cfg.lsmc);
  const ExitStatistics st = exit_statistics(res, b);
  info["saturated_steps"] = b.saturated_steps;
  art.write_text("lsmc_summary.json", lsmc_summary_json(res, st));
  art.write("exit_histogram.csv", [&](std::ostream& os) {
    write_exit_histogram_csv(os, res, cfg.market.horizon_T, cfg.exports.histogram_bins);
  });
  art.write("coefficients.csv", [&](std::ostream& os) { write_coefficients_csv(os, res, b); });
  art.write("exit_scatter.csv", [&](std::ostream& os) {
    os << "path,tau,S_tau,perf_tau\n";
    for (const auto& p : exit_scatter(b, res))
      os << p.path << ',' << fmt_double(p.tau) << ',' << fmt_double(p.s_tau) << ','
         << fmt_double(p.perf_tau) << '\n';
  });
}

nlohmann::ordered_json grid_summary(const ValueGrid& vg, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["v_t0_y0_s0"] = vg.value_at(0, cfg.pool.y0, cfg.market.s0);
  j["substeps"] = vg.diagnostics.substeps;
  j["max_intensity"] = vg.diagnostics.max_intensity;
  j["exp_clamps"] = vg.diagnostics.exp_clamps;
  j["notes"] = vg.diagnostics.notes;
  return j;
}

void write_grid_outputs(const ValueGrid& vg, const RunConfig& cfg, Artifacts& art,
                        const std::string& suffix) {
  art.write("value_grid" + suffix + ".csv", [&](std::ostream& os) {
    write_value_grid_csv(os, vg, cfg.exports.grid_y_stride);
  });
  art.write("policy" + suffix + ".csv",
            [&](std::ostream& os) { write_policy_csv(os, extract_policy(vg)); });
  art.write("slice_t0" + suffix + ".csv",
            [&](std::ostream& os) { write_value_grid_csv(os, slice_at_time(vg, 0)); });
  art.write("slice_tmid" + suffix + ".csv", [&](std::ostream& os) {
    write_value_grid_csv(os, slice_at_time(vg, vg.level_near(0.5 * cfg.market.horizon_T)));
  });
  art.write("slice_y0" + suffix + ".csv",
            [&](std::ostream& os) { write_value_grid_csv(os, slice_at_reserve(vg, cfg.pool.y0)); });
}

void run_pde(const RunConfig& cfg, Artifacts& art, nlohmann::ordered_json& info) {
  const GridSpec grid = cfg.resolved_grid();
  const ValueGrid vg = solve_qvi(cfg.pool, cfg.market, cfg.fee, grid);
  write_grid_outputs(vg, cfg, art, "");
  nlohmann::ordered_json summary;
  summary["risk_neutral"] = grid_summary(vg, cfg);
  if (cfg.risk) {
    const ValueGrid ra = solve_qvi_risk_averse(cfg.pool, cfg.market, cfg.fee, grid, *cfg.risk);
    write_grid_outputs(ra, cfg, art, "_psi");
    double dist = 0;
    for (int l = 0; l < vg.n_levels(); ++l)
      dist = std::max(dist, (ra.values[l] - vg.values[l]).cwiseAbs().maxCoeff());
    nlohmann::ordered_json r = grid_summary(ra, cfg);
    r["psi"] = cfg.risk->psi;
    r["sup_distance_to_risk_neutral"] = dist;
    summary["risk_averse"] = r;
  }
  art.write_text("pde_summary.json", summary.dump(2));
  info["levels_recorded"] = vg.n_levels();
}

void run_sweep_cmd(const RunConfig& cfg, Artifacts& art, nlohmann::ordered_json& info,
                   std::ostream& out) {
  const SweepReport rep = run_sweep(
      multiplier_scenarios(cfg.model(), cfg.sweep_target, cfg.sweep_factors), cfg.sweep_seeds);
  art.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rep); });
  const std::string heading = std::string("Sweep over ") + to_string(cfg.sweep_target) + " (" +
                              std::to_string(cfg.sim.n_paths) + " paths)";
  art.write("sweep.txt", [&](std::ostream& os) { render_sweep_table(os, rep, heading); });
  render_sweep_table(out, rep, heading);
  int failed = 0;
  for (const auto& r : rep.rows) failed += r.ok() ? 0 : 1;
  info["failed_rows"] = failed;
  if (failed) throw std::runtime_error(std::to_string(failed) + " sweep row(s) failed");
}

}  // namespace

int dispatch(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
             std::ostream& err) {
  bool known = false;
  for (const auto& s : subcommands()) known = known || s == subcommand;
  if (!known) {
    err << "usage error: unknown subcommand '" << subcommand
        << "' (expected simulate|lsmc|pde|sweep)\n";
    return exit_usage;
  }

  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
    return exit_failure;
  }

  Artifacts art(dir);
  nlohmann::ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = cfg.sim.seed;
  manifest["config"] = to_config_text(cfg);
  nlohmann::ordered_json info = nlohmann::ordered_json::object();

  int status = exit_ok;
  try {
    if (subcommand == "simulate") run_simulate(cfg, art, info);
    else if (subcommand == "lsmc") run_lsmc(cfg, art, info);
    else if (subcommand == "pde") run_pde(cfg, art, info);
    else run_sweep_cmd(cfg, art, info, out);
    manifest["complete"] = true;
  } catch (const std::exception& e) {
    err << "error in " << subcommand << ": " << e.what() << '\n';
    manifest["complete"] = false;
    manifest["error"] = e.what();
    status = exit_failure;
  }
  manifest["files"] = art.files();
  manifest["info"] = info;

  std::ofstream mf(dir / (subcommand + ".manifest.json"));
  mf << manifest.dump(2) << '\n';
  if (!mf) {
    err << "error: cannot write manifest in " << dir << '\n';
    return exit_failure;
  }
  if (status == exit_ok) {
    out << subcommand << ": wrote";
    for (const auto& f : art.files()) out << ' ' << f;
    out << " under " << dir.string() << '\n';
  }
  return status;
}

}  // namespace lpexit
