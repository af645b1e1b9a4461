#pragma once

#include "cyberinv/hjb_pide.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cyberinv {

struct GainOptions {
    double t = 0.0;
    std::vector<double> h_values{0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    /// Empty: every lambda node of the grid.
    std::vector<double> lambda_values{27.0};
    /// constant, baseline, expectation or all
    std::string benchmark = "constant";

    friend bool operator==(const GainOptions&, const GainOptions&) = default;
};

struct PremiumOptions {
    double theta = 0.3;
    std::vector<double> eta_vars{10.0, 50.0, 100.0};
    std::size_t mc_paths = 100'000;

    friend bool operator==(const PremiumOptions&, const PremiumOptions&) = default;
};

struct TraceOptions {
    std::size_t paths = 2;
    double t_init = 0.0;
    double h_init = 0.0;

    friend bool operator==(const TraceOptions&, const TraceOptions&) = default;
};

struct RunConfig {
    Problem problem;
    SolverGrid grid;
    SolverOptions solver;
    GainOptions gain;
    PremiumOptions premium;
    TraceOptions trace;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 20240917;
    unsigned threads = 0;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses INI text: [section] headers, key = value lines, ';' or '#'
/// comments. Every key is optional; missing ones take the defaults above
/// (lambda_min defaults to lambda0). Environment variables
/// CYBERINV_<SECTION>_<KEY> override file values when `use_env` is set.
/// All problems are collected and reported together in one ConfigError,
/// one line per offending key.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>",
                       bool use_env = true);
RunConfig load_config(const std::filesystem::path& path, bool use_env = true);
/// Defaults plus environment overrides, for runs without a config file.
RunConfig default_config(bool use_env = true);

/// Cross-field checks (grid covers lambda0, parameter domains, ...); throws
/// ConfigError listing every violation.
void validate_config(const RunConfig& config);

/// Applies the desk-scale grid preset (d_lambda = 3, d_h = 1, lambda_max = 120).
void apply_coarse_preset(RunConfig& config);

/// Writes the effective configuration in the same INI format.
void write_config(std::ostream& out, const RunConfig& config);

} // namespace cyberinv
