#pragma once

#include <string>
#include <vector>

#include "shrinker/config.hpp"

namespace shrinker {

// Exit codes: 0 ok, 2 configuration error, 3 solver non-convergence,
// 4 bound violation beyond tolerance.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitViolation = 4;

// Parses argv (without the program name) and runs the selected command.
// Report files land in config.out_dir.
int run_cli(const std::vector<std::string>& args);

// Command entry points, testable in-process.
int cmd_verify(const RunConfig& config);
int cmd_entropy(const RunConfig& config);
int cmd_converge(const RunConfig& config);
int cmd_scan(const RunConfig& config);
int cmd_gibbs(const RunConfig& config);

// Worker cap from SHRINKER_SPECTRA_THREADS, applied on top of config.threads.
int effective_threads(int requested);

} // namespace shrinker
