#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lpexit/config.hpp"

namespace lpexit {

inline constexpr const char* kVersion = "lpexit 0.1.0";

/// Exit statuses of dispatch.
enum ExitStatus : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

const std::vector<std::string>& subcommands();

/// Runs one subcommand and writes its artifacts plus `<subcommand>.manifest.json`
/// under cfg.output_dir. Module errors are reported on `err`, recorded in the
/// manifest (complete = false) and mapped to exit_failure.
int dispatch(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
             std::ostream& err);

}  // namespace lpexit
