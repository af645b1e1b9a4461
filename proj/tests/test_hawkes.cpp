#include "cyberinv/errors.hpp"
#include "cyberinv/hawkes.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cyberinv;

namespace {

const HawkesParams standard = HawkesParams::standard();

double intensity_by_hand(const HawkesParams& p, const std::vector<double>& events, double t) {
    double lam = p.alpha() + (p.lambda0() - p.alpha()) * std::exp(-p.xi() * t);
    for (double tau : events) {
        if (tau <= t) {
            lam += p.beta() * std::exp(-p.xi() * (t - tau));
        }
    }
    return lam;
}

} // namespace

TEST_CASE("parameter validation and stability") {
    CHECK_THROWS_AS(HawkesParams(27, 27, 15, 15), StabilityError);
    CHECK_THROWS_AS(HawkesParams(27, 27, 15, 20), StabilityError);
    CHECK_THROWS_AS(HawkesParams(0, 27, 15, 9), ArgumentError);
    CHECK_THROWS_AS(HawkesParams(27, -1, 15, 9), ArgumentError);
    CHECK_THROWS_AS(HawkesParams(27, 27, 15, -1), ArgumentError);
    CHECK_NOTHROW(HawkesParams(27, 27, 15, 0));
}

TEST_CASE("expected intensity: closed-form values and the moment ODE") {
    CHECK(expected_intensity(standard, 0.0) == doctest::Approx(27.0));
    CHECK(expected_intensity(standard, 50.0) == doctest::Approx(67.5));
    CHECK(expected_intensity(standard, 1.0) == doctest::Approx(67.40).epsilon(1e-4));
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        const auto m = oracle::hawkes_moments(27, 27, 15, 9, t);
        CHECK(expected_intensity(standard, t) == doctest::Approx(m.mean_intensity).epsilon(1e-10));
    }
}

TEST_CASE("expected count matches quadrature of the expected intensity") {
    CHECK(expected_count(standard, 0.0) == 0.0);
    CHECK(expected_count(standard, 1.0) == doctest::Approx(60.77).epsilon(1e-4));
    for (double t : {0.01, 0.3, 1.0, 3.0}) {
        const double quad = oracle::simpson([](double s) { return expected_intensity(standard, s); },
                                            0.0, t);
        CHECK(expected_count(standard, t) == doctest::Approx(quad).epsilon(1e-10));
    }
    const HawkesParams poisson(27, 27, 15, 0);
    CHECK(expected_count(poisson, 0.7) == doctest::Approx(27 * 0.7).epsilon(1e-14));
}

TEST_CASE("expected count is nondecreasing in t and in beta") {
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double cur = expected_count(standard, 0.02 * i);
        CHECK(cur >= prev);
        prev = cur;
    }
    prev = 0.0;
    for (double beta = 0.0; beta < 14.9; beta += 0.5) {
        const double cur = expected_count(HawkesParams(27, 27, 15, beta), 1.0);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("intensity variance against the independent moment system") {
    CHECK(intensity_variance(standard, 0.0) == 0.0);
    CHECK(intensity_variance(HawkesParams(27, 27, 15, 0), 1.0) == doctest::Approx(0.0));
    for (double t : {0.05, 0.5, 1.0, 2.0}) {
        const auto m = oracle::hawkes_moments(27, 27, 15, 9, t);
        CHECK(intensity_variance(standard, t) == doctest::Approx(m.var_intensity).epsilon(1e-7));
        CHECK(intensity_variance(standard, t) > 0.0);
    }
    const auto fast = HawkesParams(27, 27, 50, 9);
    CHECK(intensity_variance(fast, 1.0) < intensity_variance(standard, 1.0));
}

TEST_CASE("lambda_max heuristic") {
    CHECK(lambda_max_heuristic(standard, 1.0) == doctest::Approx(216.0).epsilon(5.0 / 216.0));
    const HawkesParams poisson(27, 30, 15, 0);
    CHECK(lambda_max_heuristic(poisson, 1.0) ==
          doctest::Approx(expected_intensity(poisson, 1.0)));
}

TEST_CASE("path intensity equals the explicit sum at machine precision") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto path = simulate_path(standard, 1.0, seed);
        REQUIRE(path.size() > 0);
        for (std::size_t i = 1; i < path.size(); ++i) {
            REQUIRE(path.event_times()[i] > path.event_times()[i - 1]);
        }
        IntensityCursor cursor(path);
        for (int k = 0; k <= 400; ++k) {
            const double t = k / 400.0;
            const double exact = intensity_by_hand(standard, path.event_times(), t);
            CHECK(path.intensity(t) == doctest::Approx(exact).epsilon(1e-13));
            CHECK(cursor.at(t) == doctest::Approx(exact).epsilon(1e-13));
            CHECK(path.intensity(t) >= 27.0 - 1e-12);
        }
        const double tau = path.event_times().front();
        CHECK(path.intensity(tau) - path.intensity_left(tau) == doctest::Approx(9.0));
    }
}

TEST_CASE("thinning candidates never exceed the running bound") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CounterRng rng(seed, Stream::paths, 0);
        std::vector<ThinningStep> trace;
        const auto path = simulate_path(HawkesParams(20, 60, 10, 7), 2.0, rng, &trace);
        for (const auto& step : trace) {
            REQUIRE(step.intensity <= step.bound * (1.0 + 1e-12));
            REQUIRE(step.intensity == doctest::Approx(path.intensity_left(step.time)).epsilon(1e-12));
        }
    }
}

TEST_CASE("simulation is deterministic per seed") {
    const auto a = simulate_path(standard, 1.0, 42);
    const auto b = simulate_path(standard, 1.0, 42);
    CHECK(a.event_times() == b.event_times());
    const auto c = simulate_path(standard, 1.0, 43);
    CHECK(a.event_times() != c.event_times());
}

TEST_CASE("short horizon gives an almost surely empty path") {
    std::size_t events = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        events += simulate_path(standard, 1e-6, seed).size();
    }
    CHECK(events <= 2);
}

TEST_CASE("Monte Carlo count mean within 4 standard errors of the closed form") {
    // standard parameters plus five random stable draws
    std::vector<HawkesParams> cases{standard};
    CounterRng rng(2024, Stream::test, 0);
    while (cases.size() < 6) {
        const double xi = 2.0 + 20.0 * rng.uniform();
        cases.emplace_back(5.0 + 30.0 * rng.uniform(), 5.0 + 30.0 * rng.uniform(), xi,
                           0.8 * xi * rng.uniform());
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto m = simulate_count_moments(cases[i], 1.0, 100'000, 100 + i);
        INFO("case " << i);
        CHECK(std::abs(m.mean.value - expected_count(cases[i], 1.0)) < 4.0 * m.mean.std_error);
    }
}

TEST_CASE("Monte Carlo count variance agrees with the moment system") {
    const auto var = count_variance(standard, 1.0, 100'000, 7);
    const auto oracle_moments = oracle::hawkes_moments(27, 27, 15, 9, 1.0);
    CHECK(oracle_moments.var_count == doctest::Approx(309.0).epsilon(0.002));
    CHECK(std::abs(var.value - oracle_moments.var_count) < 4.0 * var.std_error);

    const auto poisson = count_variance(HawkesParams(27, 27, 15, 0), 1.0, 20'000, 8);
    CHECK(std::abs(poisson.value - 27.0) < 3.0 * poisson.std_error);
    CHECK_THROWS_AS(count_variance(standard, 1.0, 9'999, 1), ArgumentError);
}
