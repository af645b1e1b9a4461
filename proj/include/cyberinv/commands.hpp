#pragma once

#include "cyberinv/config.hpp"
#include "cyberinv/poisson_benchmark.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cyberinv {

/// Batch commands behind the cyberinv executable. Each writes its artifacts
/// under config.output_dir and a short human-readable summary to `log`.
/// Field arguments name a stem such as out/hawkes (files out/hawkes.json,
/// out/hawkes.value.bin, out/hawkes.policy.bin).

/// Prints the effective configuration.
void cmd_validate(const RunConfig& config, std::ostream& log);

/// Writes <out>/hawkes.{json,value.bin,policy.bin}, hawkes.quality.json and,
/// with export_csv, hawkes.csv.
void cmd_solve(const RunConfig& config, bool export_csv, std::ostream& log);

/// Writes <out>/poisson_<mode>.* in the same layout.
void cmd_solve_poisson(const RunConfig& config, PoissonMode mode, bool export_csv,
                       std::ostream& log);

/// Simulates config.trace.paths attack paths and writes, per path i,
/// trace_<i>.csv (t, lambda, z, H) and path_<i>.csv (index, tau).
void cmd_trace(const RunConfig& config, const std::filesystem::path& field, std::ostream& log);

/// Writes gain.csv for the configured benchmark(s) over the h_values x
/// lambda_values query grid. Missing Poisson fields are solved and saved.
void cmd_gain(const RunConfig& config, const std::filesystem::path& field, std::ostream& log);

/// Writes premium.json, std_table.csv and premium_table.csv.
void cmd_premium(const RunConfig& config, const std::filesystem::path& field, std::ostream& log);

/// Static Gordon-Loeb optimum for attack probability p and potential loss;
/// writes static_gl.csv.
void cmd_static_gl(const RunConfig& config, double p, double loss, std::ostream& log);

/// Writes moments.csv (t, mean_intensity, var_intensity, mean_count) on a
/// grid of `points` times and reports Var(N_T) by Monte Carlo.
void cmd_moments(const RunConfig& config, std::size_t points, std::ostream& log);

/// Stem of a field file set inside the output directory.
std::filesystem::path field_stem(const RunConfig& config, const std::string& name);

} // namespace cyberinv
