#pragma once

#include <string>

namespace scatter_trace {

struct CliOptions {
    std::string task;  // subcommand; falls back to the config's "task"
    std::string config_path;
    std::string out_dir;  // overrides io.output_dir when non-empty
    bool emit_integrand = false;
};

// Parses the config, runs the task, writes declared outputs, prints the
// one-line summary. Returns the process exit code (0 ok, 2 config,
// 3 numerical, 4 validation mismatch).
int run_cli(const CliOptions& options);

}  // namespace scatter_trace
