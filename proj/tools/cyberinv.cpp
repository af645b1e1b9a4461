// cyberinv: batch front end for the dynamic cybersecurity investment model.

#include "cyberinv/commands.hpp"
#include "cyberinv/errors.hpp"
#include "cyberinv/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

enum ExitCode { ok = 0, config_error = 2, solver_error = 3, io_error = 4 };

} // namespace

int main(int argc, char** argv) {
    using namespace cyberinv;

    CLI::App app{"Optimal dynamic cybersecurity investment under Hawkes attacks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> mc_paths;
    bool coarse = false;
    bool no_env = false;
    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides [run] output_dir)");
    app.add_option("--seed", seed, "top-level random seed");
    app.add_option("--threads", threads, "maximum worker threads (0 = all cores)");
    app.add_option("--mc-paths", mc_paths, "Monte Carlo paths for premia and moments");
    app.add_flag("--coarse", coarse, "desk-scale grid: d_lambda=3, d_h=1, lambda_max=120");
    app.add_flag("--no-env", no_env, "ignore CYBERINV_<SECTION>_<KEY> environment overrides");

    auto* validate = app.add_subcommand("validate", "check a configuration and print it resolved");

    bool csv = false;
    auto* solve = app.add_subcommand("solve", "solve the HJB-PIDE and store V and z*");
    solve->add_flag("--csv", csv, "also export t,lambda,h,V,z_star CSV");

    std::string mode = "expectation";
    auto* solve_poisson = app.add_subcommand("solve-poisson", "solve a Poisson benchmark PDE");
    solve_poisson->add_option("--mode", mode, "baseline or expectation")
        ->check(CLI::IsMember({"baseline", "expectation"}));
    solve_poisson->add_flag("--csv", csv, "also export t,lambda,h,V,z_star CSV");

    std::string field;
    auto* trace = app.add_subcommand("trace", "optimal control along simulated attack paths");
    trace->add_option("--field", field, "field stem (default <out>/hawkes)");
    auto* gain = app.add_subcommand("gain", "relative gains against the benchmarks");
    gain->add_option("--field", field, "field stem (default <out>/hawkes)");
    auto* premium = app.add_subcommand("premium", "premia with and without optimal prevention");
    premium->add_option("--field", field, "field stem (default <out>/hawkes)");

    double p = 1.0;
    double loss = 400.0;
    auto* static_gl = app.add_subcommand("static-gl", "static Gordon-Loeb optimum");
    static_gl->add_option("--p", p, "attack probability")->check(CLI::Range(0.0, 1.0));
    static_gl->add_option("--loss", loss, "potential loss")->check(CLI::NonNegativeNumber);

    std::size_t points = 11;
    auto* moments = app.add_subcommand("moments", "intensity and count moments over [0, T]");
    moments->add_option("--points", points, "number of time points")->check(CLI::Range(2, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        RunConfig config = config_path.empty() ? default_config(!no_env)
                                               : load_config(config_path, !no_env);
        if (!out_dir.empty()) {
            config.output_dir = out_dir;
        }
        if (seed) {
            config.seed = *seed;
        }
        if (threads) {
            config.threads = *threads;
        }
        if (mc_paths) {
            config.premium.mc_paths = *mc_paths;
        }
        if (coarse) {
            apply_coarse_preset(config);
        }
        validate_config(config);
        set_max_threads(config.threads);
        const std::filesystem::path stem =
            field.empty() ? field_stem(config, "hawkes") : std::filesystem::path(field);

        if (*validate) {
            cmd_validate(config, std::cout);
        } else if (*solve) {
            cmd_solve(config, csv, std::cout);
        } else if (*solve_poisson) {
            cmd_solve_poisson(config, parse_poisson_mode(mode), csv, std::cout);
        } else if (*trace) {
            cmd_trace(config, stem, std::cout);
        } else if (*gain) {
            cmd_gain(config, stem, std::cout);
        } else if (*premium) {
            cmd_premium(config, stem, std::cout);
        } else if (*static_gl) {
            cmd_static_gl(config, p, loss, std::cout);
        } else if (*moments) {
            cmd_moments(config, points, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io_error;
    } catch (const ArgumentError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return solver_error;
    } catch (const PolicyError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return solver_error;
    }
    return ok;
}
