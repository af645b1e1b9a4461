#include "cyberinv/errors.hpp"
#include "cyberinv/poisson_benchmark.hpp"

#include <doctest.h>

#include <cmath>

using namespace cyberinv;

namespace {

SolverGrid h_grid() {
    SolverGrid g = SolverGrid::coarse();
    g.snapshot_intervals = 40;
    return g;
}

} // namespace

TEST_CASE("benchmark intensities") {
    const auto hp = HawkesParams::standard();
    CHECK(lambda_baseline(hp) == 27.0);
    CHECK(lambda_baseline(HawkesParams(27, 50, 15, 9)) == 50.0);
    CHECK(lambda_baseline(HawkesParams(27, 27, 40, 1)) == 27.0);

    const double le = lambda_expectation_matched(hp, 1.0);
    CHECK(le == doctest::Approx(60.75).epsilon(2e-4));
    CHECK(std::round(le) == 61.0);
    // hand evaluation of the printed formula
    const double c = 27.0 * 15.0 / 6.0;
    CHECK(le == doctest::Approx(c + (1.0 - std::exp(-15.0)) / 6.0 * (27.0 - c)).epsilon(1e-14));
    // the exact expected count per unit time decays at xi - beta instead
    CHECK(expected_count(hp, 1.0) - le == doctest::Approx(0.02).epsilon(0.1));

    CHECK(lambda_expectation_matched(HawkesParams(27, 27, 15, 0), 1.0) == doctest::Approx(27.0));
    CHECK_THROWS_AS(lambda_expectation_matched(hp, 0.0), ArgumentError);
    CHECK(poisson_intensity(PoissonMode::baseline, hp, 1.0) == 27.0);
    CHECK(parse_poisson_mode("expectation") == PoissonMode::expectation);
    CHECK_THROWS_AS(parse_poisson_mode("mean"), ArgumentError);
}

TEST_CASE("one-dimensional field: terminal condition, sign and monotonicity") {
    const SolverGrid g = h_grid();
    const Problem p;
    const auto field = solve_poisson(g, 27.0, p.breach, p.costs);
    CHECK(field.intensity() == 27.0);
    CHECK(field.value.meta().one_dimensional);
    CHECK(field.value.meta().grid.n_lambda() == 1);
    const std::size_t K = g.snapshot_intervals;
    for (std::size_t m = 0; m < g.n_h(); ++m) {
        CHECK(field.value.at(K, 0, m) == p.costs.utility(g.h_at(m)));
    }
    for (std::size_t k = 0; k <= K; ++k) {
        for (std::size_t m = 0; m < g.n_h(); ++m) {
            REQUIRE(field.policy.at(k, 0, m) >= 0.0);
            if (m > 0) {
                REQUIRE(field.value.at(k, 0, m) >= field.value.at(k, 0, m - 1) - 1e-9);
            }
        }
    }
    // intensity is ignored on lookup
    CHECK(field.value.query(0.5, 1000.0, 3.0) == field.value.query(0.5, 27.0, 3.0));
}

TEST_CASE("zero vulnerability and zero utility") {
    Problem p;
    p.breach.v = 0.0;
    p.costs.utility = TerminalUtility::zero();
    const auto field = solve_poisson(h_grid(), 40.0, p.breach, p.costs);
    for (double x : field.value.data()) {
        REQUIRE(x == 0.0);
    }
    for (double x : field.policy.data()) {
        REQUIRE(x == 0.0);
    }
}

TEST_CASE("identical inputs give bit-identical fields") {
    const Problem p;
    const auto a = solve_poisson(h_grid(), 60.75, p.breach, p.costs);
    const auto b = solve_poisson(h_grid(), 60.75, p.breach, p.costs);
    CHECK(a.value.data() == b.value.data());
    CHECK(a.policy.data() == b.policy.data());
}

TEST_CASE("higher benchmark intensity gives a higher value") {
    const Problem p;
    const auto low = solve_poisson(h_grid(), lambda_baseline(p.hawkes), p.breach, p.costs);
    const auto high = solve_poisson(h_grid(), lambda_expectation_matched(p.hawkes, 1.0), p.breach, p.costs);
    for (std::size_t i = 0; i < low.value.data().size(); ++i) {
        REQUIRE(high.value.data()[i] >= low.value.data()[i] - 1e-9);
    }
}

TEST_CASE("agrees with the two-dimensional solve without self-excitation") {
    SolverGrid g = h_grid();
    g.lambda_max = 57.0;
    Problem p;
    p.hawkes = HawkesParams(27, 27, 15, 0);
    const auto full = solve(g, p);
    const auto flat = solve_poisson(g, 27.0, p.breach, p.costs);
    double worst = 0.0;
    for (std::size_t k = 0; k <= g.snapshot_intervals; ++k) {
        for (std::size_t m = 0; m < g.n_h(); ++m) {
            const double a = full.value.at(k, 0, m);
            const double b = flat.value.at(k, 0, m);
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
    }
    CHECK(worst < 0.01);
}

TEST_CASE("h refinement converges") {
    const Problem p;
    SolverGrid g = h_grid();
    g.d_h = 2.0;
    const auto a = solve_poisson(g, 27.0, p.breach, p.costs);
    const auto b = solve_poisson(g.refined(2.0), 27.0, p.breach, p.costs);
    const auto c = solve_poisson(g.refined(4.0), 27.0, p.breach, p.costs);
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t m = 0; m < g.n_h(); ++m) {
        d1 = std::max(d1, std::abs(a.value.at(0, 0, m) - b.value.at(0, 0, 2 * m)));
        d2 = std::max(d2, std::abs(b.value.at(0, 0, 2 * m) - c.value.at(0, 0, 4 * m)));
    }
    CHECK(d2 * 1.5 < d1);
}
