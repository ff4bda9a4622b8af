#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "fkpp/config.hpp"

namespace fkpp::cli {

enum ExitCode : int {
  kPass = 0,
  kCheckFail = 1,
  kInvalidConfig = 2,
  kSolverFailure = 3,
};

struct RunOptions {
  int threads = 1;
  /// Reserved: every algorithm is deterministic; only the eigen restarts
  /// draw random starts and they use this seed.
  std::uint64_t seed = 0;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand and writes its artifacts into `out_dir`. Nothing is
/// written when the config is invalid (exit code 2).
int run(const std::string& subcommand, const std::filesystem::path& config_path,
        const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& log);

int run(const std::string& subcommand, const RunConfig& config,
        const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& log);

}  // namespace fkpp::cli
