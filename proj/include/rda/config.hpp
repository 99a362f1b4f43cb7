#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rda/experiments.hpp"

namespace rda {

/// Fully validated run configuration. Built only by parse_config.
struct RunConfig {
    PhysicalParams phys;
    std::optional<double> delta;
    PowerNonlinearity nl;

    int dim = 1;
    double L = 0.0;
    int n = 0;

    SolveSpec solve;

    std::vector<std::uint64_t> seeds;
    double dt_path = 0.0;
    std::optional<double> t_min;
    std::optional<double> t_max;

    std::vector<double> tau_list;
    std::vector<double> radii{1.0};
    TemperedFamilySpec family;
    std::vector<double> k_list{5.0, 10.0, 15.0, 20.0};
    double epsilon = 1e-3;
    std::vector<CocycleSplit> splits;
    double cocycle_tolerance = 1e-10;
    double t_start = 0.0;
    double t_end = 10.0;
    AbsorptionOptions absorb;
    TemperednessOptions tempered;
    bool probe_temperedness = true;
    int oracle_mode = 20;
    double oracle_eta = 1.0;
    std::vector<double> oracle_dts{1e-2, 5e-3, 2.5e-3};
    double oracle_t_final = 10.0;

    std::string output_dir = "out";

    /// Sorted `key = value` lines of the keys actually given.
    std::string canonical;
    std::string hash;

    ModelConfig model() const;
    Grid grid() const;
    DiscreteProblem problem() const;
};

struct ConfigError {
    int line = 0;  // 0 when the error is not tied to a line (missing key, cross-check)
    std::string key;
    std::string message;

    std::string to_string() const;
};

class ConfigErrors : public std::runtime_error {
public:
    explicit ConfigErrors(std::vector<ConfigError> errors);
    const std::vector<ConfigError>& errors() const { return errors_; }

private:
    std::vector<ConfigError> errors_;
};

/// Parses the flat `section.key = value` format (`#` starts a comment).
/// Throws ConfigErrors listing every problem found, not just the first.
/// `overrides` replace or add keys after reading the text (used by CLI flags).
RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides = {});

/// Canonical hash of a config text with the same overrides applied.
std::string config_hash(std::string_view text, const std::map<std::string, std::string>& overrides = {});

/// Every accepted key with its default ("" when required).
const std::vector<std::pair<std::string, std::string>>& config_keys();

}  // namespace rda
