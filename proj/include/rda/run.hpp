#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "rda/config.hpp"

namespace rda {

enum ExitCode : int {
    kExitPass = 0,
    kExitAssertionFailed = 1,
    kExitUsage = 2,
    kExitDivergence = 3,
};

struct RunOptions {
    std::string command;
    std::filesystem::path config_path;
    std::optional<int> seed_panel;
    bool deterministic = false;
    std::optional<std::filesystem::path> out_dir;
};

/// Config-key overrides implied by command-line flags.
std::map<std::string, std::string> flag_overrides(const RunOptions& opt);

/// Path range a command needs for the given config: [t_min, t_max], both
/// widened by any explicit path.t_min / path.t_max. Throws ConfigErrors when
/// an explicit bound is too narrow.
std::pair<double, double> required_path_range(const RunConfig& cfg, const std::string& command);

/// Runs one experiment subcommand and writes its artifacts into cfg.output_dir.
ExperimentReport run_experiment(const RunConfig& cfg, const std::string& command, bool deterministic);

/// Verifies that every file in `dir` embeds `hash`. Writes one line per file.
bool check_outputs(const std::filesystem::path& dir, const std::string& hash, std::ostream& out);

/// Full CLI behaviour: parse, validate, run, print the summary, map errors to exit codes.
int run(const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace rda
