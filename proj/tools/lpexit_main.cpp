#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpexit/cli.hpp"
#include "lpexit/config.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A manifest written by a previous run carries its config document verbatim.
std::string config_text(const std::string& path) {
  std::string text = read_file(path);
  if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return nlohmann::json::parse(text).at("config").get<std::string>();
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal LP exit from a constant-product pool: simulation, LSMC and QVI solver"};
  app.set_version_flag("--version", lpexit::kVersion);

  std::string command, config_path, preset, profile, out_dir;
  std::uint64_t seed = 0;
  double psi = 0;
  std::vector<std::string> sets;
  bool export_binary = false;

  app.add_option("command", command, "simulate | lsmc | pde | sweep")->required();
  app.add_option("--config", config_path, "key = value document (or a run manifest .json)");
  app.add_option("--preset", preset, "paper-toy | paper-calibrated");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (default 20240601)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--profile", profile, "paper | desk");
  auto* psi_opt = app.add_option("--psi", psi, "risk aversion; enables the risk-averse solve");
  app.add_option("--set", sets, "extra key=value overrides, applied last");
  app.add_flag("--export-binary", export_binary, "also dump the simulated bundle (bundle.bin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lpexit::exit_usage;
  }

  bool known = false;
  for (const auto& s : lpexit::subcommands()) known = known || s == command;
  if (!known) {
    std::cerr << "usage error: unknown subcommand '" << command << "'\n" << app.help();
    return lpexit::exit_usage;
  }

  lpexit::RunConfig cfg;
  try {
    lpexit::ConfigOverrides ov;
    if (!preset.empty()) ov.preset = preset;
    if (!profile.empty()) ov.profile = lpexit::parse_profile(profile);
    if (*seed_opt) ov.seed = seed;
    if (!out_dir.empty()) ov.output_dir = out_dir;
    if (*psi_opt) ov.psi = psi;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      ov.entries.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (export_binary) ov.entries.emplace_back("export.binary_bundle", "true");
    cfg = lpexit::parse_config(config_path.empty() ? std::string() : config_text(config_path), ov);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return lpexit::exit_usage;
  }
  return lpexit::dispatch(command, cfg, std::cout, std::cerr);
}
