#include "cyberinv/actuarial.hpp"
#include "cyberinv/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cyberinv;

namespace {

SolverGrid premium_grid() {
    SolverGrid g;
    g.lambda_min = 27.0;
    g.lambda_max = 117.0;
    g.d_lambda = 3.0;
    g.h_max = 30.0;
    g.d_h = 1.5;
    g.snapshot_intervals = 100;
    return g;
}

const SolveResult& standard_solve() {
    static const SolveResult result = solve(premium_grid(), Problem{});
    return result;
}

} // namespace

TEST_CASE("premium arithmetic") {
    CHECK(premium(394.98, 118.56, 0.3) == doctest::Approx(430.548));
    CHECK(premium(394.98, 118.56, 0.3) == doctest::Approx(430.55).epsilon(1e-4));
    CHECK(premium(394.98, 132.70, 0.3) == doctest::Approx(434.79).epsilon(1e-4));
    CHECK(premium(394.98, 132.70, 0.0) == 394.98);
    CHECK_THROWS_AS(premium(-1.0, 1.0, 0.3), ArgumentError);
    CHECK_THROWS_AS(premium(1.0, -1.0, 0.3), ArgumentError);
    CHECK_THROWS_AS(premium(1.0, 1.0, -0.3), ArgumentError);
}

TEST_CASE("prevention gap arithmetic") {
    PremiumReport base;
    base.premium = 430.55;
    base.loss_std = 132.70;
    PremiumReport opt;
    opt.premium = 157.13;
    opt.loss_std = 62.65;
    const auto gap = prevention_gap(base, opt);
    CHECK(gap.premium_reduction_pct == doctest::Approx(63.50).epsilon(2e-4));
    CHECK(gap.std_reduction_pct == doctest::Approx(52.79).epsilon(2e-4));
    const auto same = prevention_gap(base, base);
    CHECK(same.premium_reduction_pct == 0.0);
    CHECK(same.std_reduction_pct == 0.0);
    PremiumReport zero;
    CHECK_THROWS_AS(prevention_gap(zero, opt), UndefinedGainError);
}

TEST_CASE("baseline report") {
    const Problem p;
    const auto r = premium_report_baseline(p.hawkes, p.breach, p.costs, 0.3, 20'000, 5);
    CHECK(r.expected_loss == doctest::Approx(394.98).epsilon(1e-4));
    CHECK(r.expected_loss_se == 0.0);
    CHECK(r.premium == r.expected_loss + 0.3 * r.loss_std);
    CHECK(r.mc_paths == 20'000);

    // the compound-loss formula with the moment-system Var(N_T)
    const auto mom = oracle::hawkes_moments(27, 27, 15, 9, 1.0);
    const double var = mom.mean_count * (10.0 * 0.65 + 100.0 * 0.65 * 0.35) + 100.0 * 0.65 * 0.65 * mom.var_count;
    CHECK(std::abs(r.loss_std - std::sqrt(var)) < 4.0 * r.loss_std_se);

    BreachModel safe;
    safe.v = 0.0;
    const auto z = premium_report_baseline(p.hawkes, safe, p.costs, 0.3, 20'000, 5);
    CHECK(z.expected_loss == 0.0);
    CHECK(z.loss_std == 0.0);
    CHECK(z.premium == 0.0);
}

TEST_CASE("optimal reports: lower moments, shared paths, affine identity") {
    const Problem p;
    const auto& field = standard_solve();
    const auto base = premium_report_baseline(p.hawkes, p.breach, p.costs, 0.3, 20'000, 8);
    const auto rows = premium_reports_optimal(field.policy, p.hawkes, p.breach, p.costs, 0.3,
                                              {10.0, 100.0}, 10'000, 8);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.premium == r.expected_loss + 0.3 * r.loss_std);
        CHECK(r.expected_loss < base.expected_loss);
        CHECK(r.loss_std < base.loss_std);
        CHECK(r.expected_loss_se > 0.0);
        CHECK(r.mc_paths == 10'000);
    }
    CHECK(rows[0].eta_var == 10.0);
    // common random numbers: same breaches, only the loss sizes spread
    CHECK(std::abs(rows[0].expected_loss - rows[1].expected_loss) < 2.0 * rows[0].expected_loss_se);
    CHECK(rows[1].loss_std > rows[0].loss_std);

    const auto single = premium_report_optimal(field.policy, p.hawkes, p.breach, p.costs, 0.3, 10'000, 8);
    CHECK(single.expected_loss == rows[0].expected_loss);
    CHECK(single.loss_std == rows[0].loss_std);

    const auto doc = to_json(single);
    CHECK(doc.at("premium") == single.premium);

    std::ostringstream std_csv;
    write_std_table_csv(std_csv, 10.0, {base, base}, rows);
    CHECK(std_csv.str().rfind("eta_mean,eta_var,std_baseline,std_optimal,std_reduction_pct\n", 0) == 0);
    std::ostringstream prem_csv;
    write_premium_table_csv(prem_csv, 10.0, {base, base}, rows);
    CHECK(prem_csv.str().rfind("eta_mean,eta_var,premium_baseline,premium_optimal,premium_reduction_pct\n", 0) == 0);
}

TEST_CASE("field and parameters must describe the same problem") {
    const Problem p;
    const auto& field = standard_solve();
    CHECK_THROWS_AS(premium_reports_optimal(field.policy, HawkesParams(27, 27, 15, 8), p.breach, p.costs,
                                            0.3, {10.0}, 10'000, 1),
                    ConfigError);
    BreachModel other;
    other.a = 0.2;
    CHECK_THROWS_AS(premium_reports_optimal(field.policy, p.hawkes, other, p.costs, 0.3, {10.0}, 10'000, 1),
                    ConfigError);
    CHECK_THROWS_AS(premium_reports_optimal(field.policy, p.hawkes, p.breach, p.costs, 0.3, {10.0}, 100, 1),
                    ArgumentError);
}
