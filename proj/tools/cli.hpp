// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pilotcap/capacity.hpp"

namespace pilotcap::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kInfeasible = 2,
  kNumericalFailure = 3,
};

struct CommandOptions {
  std::string command;
  std::filesystem::path config;
  std::optional<Scheme> scheme;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
};

/// Locale-independent rendering with 9 significant digits; +inf renders as "inf".
std::string format_number(double value);

/// Runs one subcommand. Diagnostics go to err, verdicts and summaries to out.
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// argv front end: pilotcap <command> --config <path> [--scheme s] [--out dir] [--seed n].
int run(int argc, char** argv);

}  // namespace pilotcap::cli
