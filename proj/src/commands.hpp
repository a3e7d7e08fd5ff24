#pragma once

#include <string>

#include "config.hpp"

namespace jdfm {

// Command implementations. Each writes its output files under config.out and
// returns a small JSON result (paths written, headline counts) for the CLI to
// print. Failures throw; the CLI turns them into error JSON + nonzero exit.
Json cmd_simulate(const RunConfig& config);
Json cmd_fit(const RunConfig& config);
Json cmd_replicate(const RunConfig& config);
Json cmd_diagnose(const RunConfig& config);
Json cmd_report(const RunConfig& config);

// Dispatch on config.command.
Json run_command(const RunConfig& config);

}  // namespace jdfm
