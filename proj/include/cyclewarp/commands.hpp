#pragma once
// Subcommand entry points.  Each takes a fully parsed configuration, writes
// its outputs under cfg.out, and returns a process exit code (0 on
// success).  Configuration problems throw std::invalid_argument; numerical
// failures propagate as other exceptions; the CLI maps them to exit codes
// 1 and 2 respectively.

#include "cyclewarp/config.hpp"

namespace cyclewarp {

int cmd_simulate(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_bootstrap(const RunConfig& cfg);
int cmd_aggregate(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);

}  // namespace cyclewarp
