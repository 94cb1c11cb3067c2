#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace eclf::cli {

struct CommandResult {
    std::vector<std::filesystem::path> artifacts;  ///< primary artifacts, hashed in the manifest
    std::filesystem::path manifest;
};

CommandResult cmd_synth(const RunConfig& config);
CommandResult cmd_decompose(const RunConfig& config);
CommandResult cmd_select(const RunConfig& config);
CommandResult cmd_forecast(const RunConfig& config);
CommandResult cmd_ablate(const RunConfig& config);
CommandResult cmd_evaluate(const RunConfig& config);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Parses arguments and dispatches. Artifact paths go to `out`; failures are
/// reported on `err` as one JSON line and yield a nonzero return value.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eclf::cli
