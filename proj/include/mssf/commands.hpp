#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mssf {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSimulation = 3,
  kExitFit = 4,
  kExitStudyQuality = 5,
};

struct CommandOptions {
  std::string command;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::filesystem::path out_dir{"."};
  std::optional<int> threads;  // overrides the config; never changes outputs
};

/// Runs one CLI command and returns its exit code. Every command writes a
/// manifest.json next to its outputs, also on failure after the config parsed.
int run_command(const CommandOptions& options, std::ostream& log);

}  // namespace mssf
