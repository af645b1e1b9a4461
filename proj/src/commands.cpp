#include "cyberinv/commands.hpp"

#include "cyberinv/actuarial.hpp"
#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"
#include "cyberinv/field_io.hpp"
#include "cyberinv/strategy_eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace cyberinv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

FieldFiles files_for(const fs::path& stem) {
    return FieldFiles::in(stem.parent_path().empty() ? fs::path(".") : stem.parent_path(),
                          stem.filename().string());
}

void require_matching_problem(const FieldMeta& meta, const RunConfig& config, const fs::path& stem) {
    const auto& p = meta.problem;
    const auto& c = config.problem;
    const bool same_costs = p.costs.delta == c.costs.delta && p.costs.gamma == c.costs.gamma &&
                            p.costs.eta_mean == c.costs.eta_mean && p.costs.rho == c.costs.rho &&
                            p.costs.horizon == c.costs.horizon &&
                            p.costs.utility == c.costs.utility;
    if (!(p.hawkes == c.hawkes) || !(p.breach == c.breach) || !same_costs) {
        throw ConfigError("field " + stem.string() +
                          " was solved for parameters that differ from the configuration");
    }
}

void report_quality(const QualityReport& q, std::ostream& log) {
    log << "  integrator: " << q.integrator.steps << " steps, " << q.integrator.rejected
        << " rejected, " << q.integrator.factorizations << " factorizations\n"
        << "  wall time: " << std::fixed << std::setprecision(2) << q.wall_seconds << " s\n"
        << std::defaultfloat << std::setprecision(6);
    if (!q.streamed) {
        log << "  terminal error: " << q.terminal_error << "\n"
            << "  monotonicity violations: " << q.monotonicity_violations << " of "
            << q.monotonicity_checked << " nodes\n";
        for (const auto& r : q.residuals) {
            log << "  residual at t=" << r.t << ": interior " << r.interior << ", boundary "
                << r.boundary << '\n';
        }
    }
    for (const auto& w : q.warnings) {
        log << "  warning: " << w << '\n';
    }
}

void persist(const fs::path& stem, const ValueField& value, const PolicyField& policy,
             const QualityReport& quality, bool export_csv, std::ostream& log) {
    const auto files = files_for(stem);
    if (!quality.streamed) {
        write_field(files, value, policy);
    }
    const fs::path qpath = stem.string() + ".quality.json";
    auto qout = open_out(qpath);
    qout << to_json(quality).dump(2) << '\n';
    close_checked(qout, qpath);
    log << "  wrote " << files.metadata.string() << '\n';
    if (export_csv) {
        if (quality.streamed) {
            log << "  CSV export skipped for a streamed field\n";
        } else {
            const fs::path cpath = stem.string() + ".csv";
            auto cout = open_out(cpath);
            write_field_csv(cout, value, policy);
            close_checked(cout, cpath);
            log << "  wrote " << cpath.string() << '\n';
        }
    }
}

LoadedField load(const fs::path& stem) { return read_field(files_for(stem)); }

PoissonField poisson_field_for(const RunConfig& config, PoissonMode mode, std::ostream& log) {
    const fs::path stem = field_stem(config, "poisson_" + std::string(to_string(mode)));
    const auto files = files_for(stem);
    const double lambda_p =
        poisson_intensity(mode, config.problem.hawkes, config.problem.costs.horizon);
    if (fs::exists(files.metadata)) {
        auto loaded = load(stem);
        const auto& meta = loaded.value.meta();
        if (meta.one_dimensional && meta.poisson_intensity == lambda_p &&
            meta.problem.breach == config.problem.breach &&
            meta.grid.snapshot_intervals == config.grid.snapshot_intervals &&
            meta.grid.d_h == config.grid.d_h && meta.grid.h_max == config.grid.h_max) {
            log << "  using " << files.metadata.string() << '\n';
            return {std::move(loaded.value), std::move(loaded.policy), {}};
        }
        log << "  " << files.metadata.string() << " does not match the configuration; re-solving\n";
    }
    auto field = solve_poisson(config.grid, lambda_p, config.problem.breach, config.problem.costs,
                               config.solver);
    persist(stem, field.value, field.policy, field.quality, false, log);
    return field;
}

} // namespace

fs::path field_stem(const RunConfig& config, const std::string& name) {
    return config.output_dir / name;
}

void cmd_validate(const RunConfig& config, std::ostream& log) {
    validate_config(config);
    log << "; configuration is valid\n";
    write_config(log, config);
}

void cmd_solve(const RunConfig& config, bool export_csv, std::ostream& log) {
    ensure_dir(config.output_dir);
    const fs::path stem = field_stem(config, "hawkes");
    const auto& g = config.grid;
    log << "solving on " << g.n_lambda() << " x " << g.n_h() << " nodes, "
        << g.snapshot_intervals + 1 << " snapshots\n";

    std::unique_ptr<StreamingFieldWriter> writer;
    SnapshotSink sink;
    if (g.nodes() * (g.snapshot_intervals + 1) > config.solver.stream_threshold) {
        FieldMeta meta{g, config.problem, config.solver};
        writer = std::make_unique<StreamingFieldWriter>(files_for(stem), meta);
        sink = [&writer](std::size_t k, std::span<const double> v, std::span<const double> z) {
            writer->write(k, v, z);
        };
    }
    auto result = solve(g, config.problem, config.solver, sink);
    if (writer) {
        writer->finish();
    }
    report_quality(result.quality, log);
    if (!result.quality.streamed) {
        const double l0 = config.problem.hawkes.lambda0();
        log << "  V(0, " << l0 << ", " << g.h_min << ") = " << result.value.query(0.0, l0, g.h_min)
            << '\n';
    }
    persist(stem, result.value, result.policy, result.quality, export_csv, log);
}

void cmd_solve_poisson(const RunConfig& config, PoissonMode mode, bool export_csv,
                       std::ostream& log) {
    ensure_dir(config.output_dir);
    const double lambda_p =
        poisson_intensity(mode, config.problem.hawkes, config.problem.costs.horizon);
    log << "Poisson benchmark (" << to_string(mode) << "): lambda^P = " << lambda_p << '\n';
    auto field = solve_poisson(config.grid, lambda_p, config.problem.breach, config.problem.costs,
                               config.solver);
    report_quality(field.quality, log);
    persist(field_stem(config, "poisson_" + std::string(to_string(mode))), field.value,
            field.policy, field.quality, export_csv, log);
}

void cmd_trace(const RunConfig& config, const fs::path& field, std::ostream& log) {
    ensure_dir(config.output_dir);
    const auto loaded = load(field);
    require_matching_problem(loaded.policy.meta(), config, field);
    const auto& hawkes = config.problem.hawkes;
    const double horizon = config.problem.costs.horizon;
    QueryDiagnostics diag;
    for (std::size_t i = 0; i < config.trace.paths; ++i) {
        CounterRng rng(config.seed, Stream::paths, i);
        const AttackPath path = simulate_path(hawkes, horizon, rng);
        const auto trace = extract_policy(loaded.policy, path, config.trace.t_init,
                                          config.trace.h_init,
                                          loaded.policy.meta().options.query, &diag);

        const fs::path tpath = config.output_dir / ("trace_" + std::to_string(i) + ".csv");
        auto tout = open_out(tpath);
        write_trace_csv(tout, trace);
        close_checked(tout, tpath);

        const fs::path ppath = config.output_dir / ("path_" + std::to_string(i) + ".csv");
        auto pout = open_out(ppath);
        pout << "index,tau\n";
        for (std::size_t j = 0; j < path.size(); ++j) {
            write_csv_row(pout, j, path.event_times()[j]);
        }
        close_checked(pout, ppath);

        const auto peak = std::max_element(trace.control.begin(), trace.control.end());
        log << "path " << i << ": " << path.size() << " attacks, peak z = "
            << (peak == trace.control.end() ? 0.0 : *peak) << ", H_T = " << trace.level.back()
            << "  -> " << tpath.string() << '\n';
    }
    if (diag.h_clamped > 0) {
        log << "warning: " << diag.h_clamped << " lookups had h outside the grid and were clamped\n";
    }
}

void cmd_gain(const RunConfig& config, const fs::path& field, std::ostream& log) {
    ensure_dir(config.output_dir);
    const auto loaded = load(field);
    require_matching_problem(loaded.value.meta(), config, field);
    const auto& g = loaded.value.meta().grid;

    std::vector<double> lambdas = config.gain.lambda_values;
    if (lambdas.empty()) {
        for (std::size_t n = 0; n < g.n_lambda(); ++n) {
            lambdas.push_back(g.lambda_at(n));
        }
    }
    std::vector<GainQuery> queries;
    for (double lambda : lambdas) {
        for (double h : config.gain.h_values) {
            queries.push_back({config.gain.t, lambda, h});
        }
    }

    std::vector<GainRow> rows;
    const std::string& which = config.gain.benchmark;
    if (which == "constant" || which == "all") {
        const auto part = gain_table_constant(queries, loaded.value, config.problem);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    for (PoissonMode mode : {PoissonMode::baseline, PoissonMode::expectation}) {
        const std::string name(to_string(mode));
        if (which != name && which != "all") {
            continue;
        }
        RunConfig poisson_config = config;
        poisson_config.grid = g;
        const auto poisson = poisson_field_for(poisson_config, mode, log);
        const auto part = gain_table_poisson(queries, loaded.value, poisson, config.problem,
                                             "poisson_" + name);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    const fs::path path = config.output_dir / "gain.csv";
    auto out = open_out(path);
    write_gain_csv(out, rows);
    close_checked(out, path);
    for (const auto& r : rows) {
        log << r.benchmark << "  t=" << r.t << " lambda=" << r.lambda << " h=" << r.h
            << "  gain=" << std::fixed << std::setprecision(3) << r.gain_pct << "%\n"
            << std::defaultfloat << std::setprecision(6);
    }
    log << "wrote " << path.string() << '\n';
}

void cmd_premium(const RunConfig& config, const fs::path& field, std::ostream& log) {
    ensure_dir(config.output_dir);
    const auto loaded = load(field);
    require_matching_problem(loaded.policy.meta(), config, field);
    const auto& p = config.problem;
    const auto& opt = config.premium;

    std::vector<PremiumReport> baseline;
    for (double s2 : opt.eta_vars) {
        CostParams costs = p.costs;
        costs.eta_var = s2;
        baseline.push_back(premium_report_baseline(p.hawkes, p.breach, costs, opt.theta,
                                                   opt.mc_paths, config.seed));
    }
    const auto optimal = premium_reports_optimal(loaded.policy, p.hawkes, p.breach, p.costs,
                                                 opt.theta, opt.eta_vars, opt.mc_paths,
                                                 config.seed);

    json doc = {{"theta", opt.theta}, {"mc_paths", opt.mc_paths}, {"seed", config.seed}};
    doc["baseline"] = json::array();
    doc["optimal"] = json::array();
    doc["reduction"] = json::array();
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        const auto gap = prevention_gap(baseline[i], optimal[i]);
        doc["baseline"].push_back(to_json(baseline[i]));
        doc["optimal"].push_back(to_json(optimal[i]));
        doc["reduction"].push_back({{"eta_var", baseline[i].eta_var},
                                    {"premium_pct", gap.premium_reduction_pct},
                                    {"std_pct", gap.std_reduction_pct}});
        log << "eta_var=" << baseline[i].eta_var << "  E[L0]=" << baseline[i].expected_loss
            << " sd(L0)=" << baseline[i].loss_std << " pi(L0)=" << baseline[i].premium
            << " | E[Lz]=" << optimal[i].expected_loss << " sd(Lz)=" << optimal[i].loss_std
            << " pi(Lz)=" << optimal[i].premium << " | premium -" << gap.premium_reduction_pct
            << "%\n";
    }

    const fs::path jpath = config.output_dir / "premium.json";
    auto jout = open_out(jpath);
    jout << doc.dump(2) << '\n';
    close_checked(jout, jpath);
    const fs::path spath = config.output_dir / "std_table.csv";
    auto sout = open_out(spath);
    write_std_table_csv(sout, p.costs.eta_mean, baseline, optimal);
    close_checked(sout, spath);
    const fs::path ppath = config.output_dir / "premium_table.csv";
    auto pout = open_out(ppath);
    write_premium_table_csv(pout, p.costs.eta_mean, baseline, optimal);
    close_checked(pout, ppath);
    log << "wrote " << jpath.string() << ", " << spath.string() << ", " << ppath.string() << '\n';
}

void cmd_static_gl(const RunConfig& config, double p, double loss, std::ostream& log) {
    ensure_dir(config.output_dir);
    const auto& m = config.problem.breach;
    const double z = static_optimum(m, p, loss);
    const double value = enbis(m, p, loss, z);
    const double residual = z > 0.0 ? static_foc_residual(m, p, loss, z) : 0.0;
    const double bound = m.v * p * loss / std::numbers::e;

    const fs::path path = config.output_dir / "static_gl.csv";
    auto out = open_out(path);
    out << "family,v,a,b,p,loss,z_star,enbis,foc_residual,bound\n";
    write_csv_row(out, std::string(to_string(m.family)), m.v, m.a, m.b, p, loss, z, value,
                  residual, bound);
    close_checked(out, path);
    log << "z* = " << z << "  ENBIS(z*) = " << value << "  FOC residual = " << residual
        << "  v p loss / e = " << bound << "\nwrote " << path.string() << '\n';
}

void cmd_moments(const RunConfig& config, std::size_t points, std::ostream& log) {
    ensure_dir(config.output_dir);
    if (points < 2) {
        throw ArgumentError("moments: need at least 2 time points");
    }
    const auto& hp = config.problem.hawkes;
    const double horizon = config.problem.costs.horizon;
    const fs::path path = config.output_dir / "moments.csv";
    auto out = open_out(path);
    out << "t,mean_intensity,var_intensity,mean_count\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double t = horizon * static_cast<double>(i) / static_cast<double>(points - 1);
        write_csv_row(out, t, expected_intensity(hp, t), intensity_variance(hp, t),
                      expected_count(hp, t));
    }
    close_checked(out, path);

    const auto var_n = count_variance(hp, horizon, config.premium.mc_paths, config.seed);
    log << "E[lambda_T] = " << expected_intensity(hp, horizon)
        << "  Var(lambda_T) = " << intensity_variance(hp, horizon)
        << "\nE[N_T] = " << expected_count(hp, horizon) << "  Var(N_T) = " << var_n.value
        << " (MC, se " << var_n.std_error << ")"
        << "\nlambda_max heuristic = " << lambda_max_heuristic(hp, horizon)
        << "\nlambda^P_b = " << lambda_baseline(hp)
        << "  lambda^P_e = " << lambda_expectation_matched(hp, horizon) << "\nwrote "
        << path.string() << '\n';
}

} // namespace cyberinv
