#include "cyberinv/errors.hpp"
#include "cyberinv/gordon_loeb.hpp"
#include "cyberinv/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cyberinv;

namespace {

BreachModel random_model(CounterRng& rng) {
    BreachModel m;
    m.family = rng.uniform() < 0.5 ? BreachFamily::class_one : BreachFamily::class_two;
    m.v = 0.05 + 0.9 * rng.uniform();
    m.a = 0.01 + 0.5 * rng.uniform();
    m.b = 0.3 + 2.0 * rng.uniform();
    return m;
}

} // namespace

TEST_CASE("breach probability values") {
    const BreachModel m = BreachModel::standard();
    CHECK(breach_prob(m, 0.0) == doctest::Approx(0.65));
    CHECK(breach_prob(m, 10.0) == doctest::Approx(0.325));
    BreachModel two = m;
    two.family = BreachFamily::class_two;
    CHECK(breach_prob(two, 0.0) == doctest::Approx(0.65));
    CHECK(breach_prob(two, 10.0) == doctest::Approx(0.65 * 0.65));

    BreachModel zero = m;
    zero.v = 0.0;
    for (double z : {0.0, 1.0, 100.0}) {
        CHECK(breach_prob(zero, z) == 0.0);
        CHECK(breach_prob_derivative(zero, z) == 0.0);
        CHECK(enbis(zero, 1.0, 400.0, z) == doctest::Approx(-z));
    }
    CHECK_THROWS_AS(breach_prob(m, -1.0), ArgumentError);
    CHECK_THROWS_AS(enbis(m, 1.5, 400.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(enbis(m, 0.5, -1.0, 1.0), ArgumentError);
}

TEST_CASE("model validation and family names") {
    BreachModel m;
    m.v = 1.2;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    m = BreachModel{};
    m.a = 0.0;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    CHECK(parse_breach_family("class2") == BreachFamily::class_two);
    CHECK(to_string(parse_breach_family("class1")) == "class1");
    CHECK_THROWS_AS(parse_breach_family("class3"), ArgumentError);
}

TEST_CASE("derivatives against central differences") {
    const BreachModel m = BreachModel::standard();
    CHECK(breach_prob_derivative(m, 0.0) == doctest::Approx(-0.065));
    CounterRng rng(5, Stream::test, 1);
    for (int i = 0; i < 50; ++i) {
        const BreachModel r = i == 0 ? m : random_model(rng);
        const double z = i == 0 ? 5.0 : 0.1 + 20.0 * rng.uniform();
        const double h = 1e-5;
        const double fd = (breach_prob(r, z + h) - breach_prob(r, z - h)) / (2 * h);
        CHECK(std::abs(breach_prob_derivative(r, z) - fd) < 1e-6);
        const double fd2 = (breach_prob_derivative(r, z + h) - breach_prob_derivative(r, z - h)) / (2 * h);
        CHECK(std::abs(breach_prob_second_derivative(r, z) - fd2) < 1e-6);
    }
}

TEST_CASE("S is strictly decreasing and convex") {
    CounterRng rng(6, Stream::test, 2);
    for (int i = 0; i < 200; ++i) {
        const BreachModel m = random_model(rng);
        const double z1 = 30.0 * rng.uniform();
        const double step = 0.1 + 5.0 * rng.uniform();
        const double s1 = breach_prob(m, z1);
        const double s2 = breach_prob(m, z1 + step);
        const double s3 = breach_prob(m, z1 + 2 * step);
        CHECK(s1 > s2);
        CHECK(s1 - 2 * s2 + s3 > 0.0);
        CHECK(s1 <= m.v);
    }
}

TEST_CASE("static optimum of the standard model") {
    const BreachModel m = BreachModel::standard();
    const double z = static_optimum(m, 1.0, 400.0);
    CHECK(z == doctest::Approx((std::sqrt(26.0) - 1.0) / 0.1).epsilon(1e-12));
    CHECK(z == doctest::Approx(40.99).epsilon(1e-3));
    const double golden = oracle::golden_max([&](double x) { return enbis(m, 1.0, 400.0, x); },
                                             0.0, 400.0);
    CHECK(z == doctest::Approx(golden).epsilon(1e-6));
    CHECK(enbis(m, 1.0, 400.0, z) > 0.0);
    CHECK(enbis(m, 1.0, 400.0, 0.0) == 0.0);
    CHECK(std::abs(static_foc_residual(m, 1.0, 400.0, z)) < 1e-9);
}

TEST_CASE("corner solution when the marginal benefit is too small") {
    const BreachModel m = BreachModel::standard();
    // -S_z(0) p loss = 0.065 * 10 < 1
    CHECK(static_optimum(m, 1.0, 10.0) == 0.0);
    BreachModel two = m;
    two.family = BreachFamily::class_two;
    CHECK(static_optimum(two, 0.1, 10.0) == 0.0);
}

TEST_CASE("random models: global optimality and the 1/e bound") {
    CounterRng rng(7, Stream::test, 3);
    int interior = 0;
    for (int i = 0; i < 100; ++i) {
        const BreachModel m = random_model(rng);
        const double p = 0.05 + 0.95 * rng.uniform();
        const double loss = 10.0 + 1000.0 * rng.uniform();
        const double z = static_optimum(m, p, loss);
        const double best = enbis(m, p, loss, z);
        const double cap = m.v * p * loss;
        for (int k = 0; k <= 4000; ++k) {
            REQUIRE(enbis(m, p, loss, cap * k / 4000.0) <= best + 1e-9 * std::max(1.0, cap));
        }
        CHECK(z < cap / std::numbers::e);
        if (z > 0.0) {
            ++interior;
            CHECK(std::abs(static_foc_residual(m, p, loss, z)) < 1e-7);
        }
    }
    CHECK(interior > 50);
}
