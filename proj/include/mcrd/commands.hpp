#pragma once

#include <filesystem>
#include <iosfwd>

#include "mcrd/config.hpp"

namespace mcrd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAssumption = 4;

int cmd_check(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
int cmd_analyze(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
int cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
int cmd_sweep(const json& raw_config, const std::filesystem::path& out, int workers,
              std::ostream* log);

// Parses, dispatches and maps exceptions onto the documented exit codes.
int run_command(const std::string& name, const json& raw_config, const std::filesystem::path& out,
                int workers, std::ostream* log);

}  // namespace mcrd
