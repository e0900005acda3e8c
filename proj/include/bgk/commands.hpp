#pragma once

#include "bgk/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

namespace bgk {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitRuntimeAbort = 3 };

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  bool overwrite = false;
};

/// Config from --config (defaults otherwise) with --threads applied.
RunConfig resolve_config(const CommandOptions& opts);

/// Creates `dir`, refusing a non-empty existing directory unless `overwrite` is set.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

// Each command returns its exit code; configuration problems and runtime aborts
// propagate as ConfigError and RuntimeAbort. Messages go to `log`.
int cmd_verify(const CommandOptions& opts, std::ostream& log);
int cmd_decay(const CommandOptions& opts, std::ostream& log);
int cmd_hydro_limit(const CommandOptions& opts, std::ostream& log);
int cmd_run(const CommandOptions& opts, std::ostream& log);

}  // namespace bgk
