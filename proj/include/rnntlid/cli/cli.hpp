#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "rnntlid/config/run_config.hpp"

namespace rnntlid {

// Entry point of the command-line tool. Exit codes: 0 success, 1 validation
// or runtime failure, 2 usage error (unknown subcommand or flag).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Reads a config file (defaults when `path` is empty), applies environment
// overrides and derives the per-stage seeds.
RunConfig load_run_config(const std::filesystem::path& path);

// Writes `<artifact>.provenance.txt`: seed, config hash and the full config.
void write_artifact_provenance(const std::filesystem::path& artifact, const RunConfig& config);

}  // namespace rnntlid
