#include "cyberinv/errors.hpp"
#include "cyberinv/strategy_eval.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cyberinv;

namespace {

// independent evaluation of J for a constant rate
double constant_oracle(double t, double lambda, double h, double zbar, const Problem& p) {
    const auto& c = p.costs;
    const double xi = p.hawkes.xi();
    const double beta = p.hawkes.beta();
    const double alpha = p.hawkes.alpha();
    const double lim = alpha * xi / (xi - beta);
    auto level = [&](double s) {
        const double e = std::exp(-c.rho * (s - t));
        return h * e + zbar / c.rho * (1.0 - e);
    };
    auto mean_lambda = [&](double s) { return lim + (lambda - lim) * std::exp(-(xi - beta) * (s - t)); };
    auto reward = [&](double s) {
        const double S = p.breach.v / (p.breach.a * level(s) + 1.0);
        return c.eta_mean * (p.breach.v - S) * mean_lambda(s);
    };
    const double span = c.horizon - t;
    return oracle::simpson(reward, t, c.horizon, 20000) - span * (c.delta * zbar + 0.5 * c.gamma * zbar * zbar) +
           std::sqrt(level(c.horizon));
}

SolverGrid eval_grid() {
    SolverGrid g;
    g.lambda_min = 27.0;
    g.lambda_max = 117.0;
    g.d_lambda = 3.0;
    g.h_max = 30.0;
    g.d_h = 1.5;
    g.snapshot_intervals = 40;
    return g;
}

const SolveResult& standard_solve() {
    static const SolveResult result = solve(eval_grid(), Problem{});
    return result;
}

} // namespace

TEST_CASE("trace time grid") {
    const auto a = trace_times(0.0, 1.0, 0.25);
    CHECK(a == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto b = trace_times(0.1, 1.0, 0.4);
    CHECK(b.size() == 4);
    CHECK(b.back() == 1.0);
    CHECK(b[2] == doctest::Approx(0.9));
    CHECK(trace_times(1.0, 1.0, 0.1).size() == 1);
    CHECK_THROWS_AS(trace_times(1.5, 1.0, 0.1), ArgumentError);
}

TEST_CASE("lower bound closed form") {
    const Problem p;
    for (double h : {0.0, 1.0, 7.0}) {
        CHECK(lower_bound(1.0, 40.0, h, p) == doctest::Approx(std::sqrt(h)));
    }
    CHECK(lower_bound(0.0, 27.0, 0.0, p) == 0.0);
    const double h = 4.0;
    const double expected = 2.0 - 0.2 * h * (1.0 + 0.05 * 0.2 * h / 2.0) +
                            10.0 * (0.65 - 0.65 / 1.4) * expected_count(p.hawkes, 1.0);
    CHECK(lower_bound(0.0, 27.0, h, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constant evaluation against the independent quadrature") {
    const Problem p;
    CounterRng rng(3, Stream::test, 4);
    for (int i = 0; i < 30; ++i) {
        const double t = 0.9 * rng.uniform();
        const double lambda = 27.0 + 150.0 * rng.uniform();
        const double h = 20.0 * rng.uniform();
        const double z = 60.0 * rng.uniform();
        CHECK(evaluate_constant(t, lambda, h, z, p) ==
              doctest::Approx(constant_oracle(t, lambda, h, z, p)).epsilon(1e-9));
        CHECK(evaluate_constant(t, lambda, h, 0.2 * h, p) ==
              doctest::Approx(lower_bound(t, lambda, h, p)).epsilon(1e-8));
    }
    Problem safe = p;
    safe.breach.v = 0.0;
    CHECK(evaluate_constant(0.25, 50.0, 9.0, 0.0, safe) ==
          doctest::Approx(std::sqrt(9.0 * std::exp(-0.2 * 0.75))).epsilon(1e-12));
    CHECK(evaluate_constant(1.0, 50.0, 9.0, 3.0, p) == doctest::Approx(3.0));
}

TEST_CASE("deterministic strategies") {
    const Problem p;
    const PiecewiseConstantRate flat{{0.0}, {12.0}};
    CHECK(evaluate_deterministic(0.0, 27.0, 1.0, flat, p) ==
          doctest::Approx(evaluate_constant(0.0, 27.0, 1.0, 12.0, p)).epsilon(1e-8));
    CHECK(evaluate_deterministic(0.0, 27.0, 1.0, ConstantRate{12.0}, p) ==
          doctest::Approx(evaluate_constant(0.0, 27.0, 1.0, 12.0, p)).epsilon(1e-8));

    // two pieces: split the quadrature by hand
    const PiecewiseConstantRate steps{{0.0, 0.5}, {30.0, 5.0}};
    const double got = evaluate_deterministic(0.0, 27.0, 0.0, steps, p);
    const double h_half = level_after(0.0, 0.2, 30.0, 0.5);
    auto level = [&](double s) {
        return s < 0.5 ? level_after(0.0, 0.2, 30.0, s) : level_after(h_half, 0.2, 5.0, s - 0.5);
    };
    auto reward = [&](double s) {
        return 10.0 * (0.65 - breach_prob(p.breach, level(s))) * expected_intensity(p.hawkes, s);
    };
    const double cost = 0.5 * (30.0 + 0.025 * 900.0) + 0.5 * (5.0 + 0.025 * 25.0);
    const double oracle_value = oracle::simpson(reward, 0.0, 0.5, 20000) +
                                oracle::simpson(reward, 0.5, 1.0, 20000) - cost + std::sqrt(level(1.0));
    CHECK(got == doctest::Approx(oracle_value).epsilon(1e-9));

    Problem safe = p;
    safe.breach.v = 0.0;
    CHECK(evaluate_deterministic(0.5, 27.0, 4.0, ConstantRate{}, safe) ==
          doctest::Approx(std::sqrt(4.0 * std::exp(-0.1))));
    const FeedbackRule rule{[](const StrategyState&) { return 1.0; }};
    CHECK_THROWS_AS(evaluate_deterministic(0.0, 27.0, 0.0, rule, p), ArgumentError);
}

TEST_CASE("best constant rate against a grid sweep") {
    const Problem p;
    for (double h : {0.0, 0.5, 5.0, 20.0}) {
        double best = -1e300;
        double best_z = 0.0;
        for (int i = 0; i <= 6000; ++i) {
            const double z = 0.01 * i;
            const double val = evaluate_constant(0.0, 27.0, h, z, p);
            if (val > best) {
                best = val;
                best_z = z;
            }
        }
        const auto opt = optimize_constant(0.0, 27.0, h, p);
        INFO("h = " << h);
        CHECK(opt.value >= best - 1e-9 * std::abs(best));
        CHECK(std::abs(opt.zbar - best_z) < 0.011);
        // doubling the cap does not move the optimum
        const auto wide = optimize_constant(0.0, 27.0, h, p, 2.0 * default_rate_cap(p));
        CHECK(std::abs(wide.zbar - opt.zbar) < 1e-6 * std::max(1.0, opt.zbar));
        CHECK(opt.value >= lower_bound(0.0, 27.0, h, p) - 1e-9);
    }
    Problem safe = p;
    safe.breach.v = 0.0;
    CHECK(optimize_constant(0.0, 27.0, 3.0, safe).zbar == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(default_rate_cap(p) == doctest::Approx(10.0 * 10.0 * 0.65 * lambda_max_heuristic(p.hawkes, 1.0) / 0.05));
}

TEST_CASE("optimal value dominates the best constant, which dominates the level-preserving rate") {
    const Problem p;
    const auto& field = standard_solve();
    for (double lambda : {27.0, 45.0, 72.0}) {
        for (double h : {0.0, 1.5, 6.0, 15.0}) {
            const double V = field.value.query(0.0, lambda, h, QueryMode::linear);
            const auto best = optimize_constant(0.0, lambda, h, p);
            const double J = lower_bound(0.0, lambda, h, p);
            CHECK(V >= best.value * (1.0 - 0.005));
            CHECK(best.value >= J - 1e-9);
            if (best.value > 0.0) {
                CHECK(gain_vs_constant(0.0, lambda, h, field.value, p) >= -0.5);
            }
        }
    }
    CHECK(gain_vs_constant(1.0, 27.0, 3.0, field.value, p) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(gain_vs_constant(1.0, 27.0, 0.0, field.value, p), UndefinedGainError);
}

TEST_CASE("policy extraction on a zero field") {
    SolverGrid g = eval_grid();
    g.lambda_max = 45.0;
    Problem p;
    p.breach.v = 0.0;
    p.costs.utility = TerminalUtility::zero();
    const auto field = solve(g, p);
    const auto path = simulate_path(p.hawkes, 1.0, 4);
    const auto trace = extract_policy(field.policy, path, 0.0, 5.0);
    REQUIRE(trace.times.size() == g.snapshot_intervals + 1);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        CHECK(trace.control[i] == 0.0);
        CHECK(trace.level[i] == doctest::Approx(5.0 * std::pow(1.0 - 0.2 * 0.025, static_cast<double>(i))));
        CHECK(trace.intensity[i] == doctest::Approx(path.intensity(trace.times[i])));
    }
    CHECK(trace.source == TraceSource::hawkes_optimal);
    CHECK_THROWS_AS(extract_policy(field.policy, path, 1.2, 0.0), ArgumentError);
}

TEST_CASE("trace determinism, Euler update and the quiet-path oracle") {
    const auto& field = standard_solve();
    const auto path = simulate_path(HawkesParams::standard(), 1.0, 99);
    const auto a = extract_policy(field.policy, path, 0.0, 0.0);
    const auto b = extract_policy(field.policy, path, 0.0, 0.0);
    CHECK(a.control == b.control);
    CHECK(a.level == b.level);
    for (std::size_t i = 0; i + 1 < a.times.size(); ++i) {
        const double dt = a.times[i + 1] - a.times[i];
        CHECK(a.level[i + 1] == doctest::Approx(a.level[i] - 0.2 * a.level[i] * dt + a.control[i] * dt));
        CHECK(a.control[i] >= 0.0);
    }

    const AttackPath quiet(HawkesParams::standard(), 1.0, {});
    const auto q = extract_policy(field.policy, quiet, 0.0, 2.0);
    const auto c = extract_policy_constant(field.policy, 27.0, 0.0, 2.0);
    CHECK(q.control == c.control);
    CHECK(q.level == c.level);
    CHECK(c.source == TraceSource::constant);
}

TEST_CASE("a burst of attacks raises the investment rate") {
    const auto& field = standard_solve();
    std::vector<double> events;
    for (int i = 0; i < 8; ++i) {
        events.push_back(0.40 + 0.004 * i);
    }
    const AttackPath burst(HawkesParams::standard(), 1.0, events);
    const auto trace = extract_policy(field.policy, burst, 0.0, 0.0);
    auto control_at = [&](double t) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            if (std::abs(trace.times[i] - t) < std::abs(trace.times[best] - t)) {
                best = i;
            }
        }
        return trace.control[best];
    };
    CHECK(control_at(0.45) > control_at(0.375));
    CHECK(trace.intensity[18] > 27.0 + 5 * 9.0 * std::exp(-15.0 * 0.05));
}

TEST_CASE("gain against a Poisson field that solves the same problem is close to zero") {
    SolverGrid g = eval_grid();
    g.lambda_max = 57.0;
    Problem p;
    p.hawkes = HawkesParams(27, 27, 15, 0);
    const auto full = solve(g, p);
    const auto flat = solve_poisson(g, 27.0, p.breach, p.costs);
    for (double h : {0.0, 1.5, 6.0, 15.0}) {
        CHECK(std::abs(gain_vs_poisson(0.0, 27.0, h, full.value, flat, p)) < 0.5);
    }
}

TEST_CASE("gain tables and CSV output") {
    const Problem p;
    const auto& field = standard_solve();
    const std::vector<GainQuery> queries{{0.0, 27.0, 1.5}, {0.0, 27.0, 6.0}, {0.5, 45.0, 3.0}};
    const auto rows = gain_table_constant(queries, field.value, p);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].h == queries[i].h);
        CHECK(rows[i].benchmark == "constant");
        CHECK(rows[i].gain_pct == doctest::Approx(gain_vs_constant(queries[i].t, queries[i].lambda, queries[i].h, field.value, p)));
    }
    std::ostringstream g;
    write_gain_csv(g, rows);
    CHECK(g.str().rfind("t,lambda,h,gain_pct,benchmark\n", 0) == 0);

    std::ostringstream t;
    write_trace_csv(t, extract_policy_constant(field.policy, 27.0, 0.0, 0.0));
    CHECK(t.str().rfind("t,lambda,z,H\n", 0) == 0);
}
