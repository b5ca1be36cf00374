#ifndef NLBVP_CLI_HPP
#define NLBVP_CLI_HPP

#include <string>
#include <vector>

#include "nlbvp/common.hpp"

namespace nlbvp::cli {

// nlbvp <command> <config.json> [--set k=v ...] [--out dir]
// commands: check | solve | study | greens | constants
// exit codes: 0 success, 2 validation, 3 solver, 4 resolution.
int run(const std::vector<std::string>& args);

// Exposed for tests: execute with an already-parsed config.
int run_command(const std::string& command, json config, const std::string& out_dir);

}  // namespace nlbvp::cli

#endif
