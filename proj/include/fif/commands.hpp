#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fif/config.hpp"

namespace fif {

enum class Command { Construct, Verify, Study, OperatorBounds, Invert, Attractor };

/// Runs one CLI command against a parsed configuration. Writes machine
/// artifacts (CSV/JSON) under `out_dir` when non-empty, a human-readable
/// report to `out`, and returns the exit code: 0 success, 1 usage/config
/// error, 2 verification failure, 3 solver non-convergence.
int run_command(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& out);

const char* command_name(Command cmd);

}  // namespace fif
