#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "randcheck/config.hpp"
#include "randcheck/model.hpp"

namespace randcheck {

inline constexpr const char* kVersion = "randcheck 0.1.0";

// Exit codes shared by the CLI and run_command.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitPrecondition = 3, kExitNumeric = 4 };

// Each command reads everything it needs from the config first, then writes
// its outputs under `out` (default "."). Errors are thrown as ConfigError,
// PreconditionError or NumericError.
void cmd_gen_data(const Config& cfg, int workers, std::ostream& log);
void cmd_train(const Config& cfg, int workers, std::ostream& log);
void cmd_nag(const Config& cfg, int workers, std::ostream& log);
void cmd_smooth_compare(const Config& cfg, int workers, std::ostream& log);
void cmd_sweep(const Config& cfg, int workers, std::ostream& log);

const std::vector<std::string>& command_names();

// Dispatches by name and maps exceptions to exit codes, printing the
// diagnostic to err.
int run_command(const std::string& name, const Config& cfg, int workers, std::ostream& log, std::ostream& err);

// Test-set ids picked at an even stride so every class is represented.
std::vector<int> select_points(int available, int count);

}  // namespace randcheck
