#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lpplvv::cli {

enum ExitCode : int { ok = 0, config_error = 2, experiment_failed = 3, io_error = 4 };

// Parses and runs one invocation. Artifacts go to disk, the primary
// artifact path (or a JSON summary with --json) to `out`, diagnostics to
// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpplvv::cli
