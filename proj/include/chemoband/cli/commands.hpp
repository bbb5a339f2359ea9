#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemoband/cli/config.hpp"
#include "chemoband/error.hpp"

namespace chemoband::cli {

/// Subcommands in the order they are listed by --help.
std::vector<std::string> command_names();

/// Preset used when --preset is not given. linstab and energy default to
/// parameter sets that satisfy their positivity requirements.
std::string default_preset(std::string_view command);

/// 2 for validation, 3 for numerical, 4 for I/O failures.
int exit_code_for(ErrorCategory category);

/// Machine-readable description of a failure, written to stderr.
nlohmann::json error_json(const Error& e);

/// Runs one subcommand, writes its outputs and manifest under `out`, and
/// prints a JSON summary to `log`. Throws Error on failure.
void run_command(std::string_view command, const RunSpec& spec, const std::filesystem::path& out,
                 std::ostream& log);

/// Command line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

} // namespace chemoband::cli
