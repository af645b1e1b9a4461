#include "cyberinv/poisson_benchmark.hpp"

#include "cyberinv/errors.hpp"

#include <cmath>
#include <string>

namespace cyberinv {

double lambda_baseline(const HawkesParams& hawkes) { return hawkes.lambda0(); }

double lambda_expectation_matched(const HawkesParams& hawkes, double horizon) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("lambda_expectation_matched: horizon must be > 0");
    }
    const double l0 = hawkes.lambda0();
    const double gap = hawkes.xi() - hawkes.beta();
    const double c = l0 * hawkes.xi() / gap;
    return c - std::expm1(-hawkes.xi() * horizon) / (horizon * gap) * (l0 - c);
}

PoissonMode parse_poisson_mode(std::string_view name) {
    if (name == "baseline") {
        return PoissonMode::baseline;
    }
    if (name == "expectation") {
        return PoissonMode::expectation;
    }
    throw ArgumentError("unknown Poisson benchmark '" + std::string(name) +
                        "' (expected baseline or expectation)");
}

std::string_view to_string(PoissonMode mode) {
    return mode == PoissonMode::baseline ? "baseline" : "expectation";
}

double poisson_intensity(PoissonMode mode, const HawkesParams& hawkes, double horizon) {
    return mode == PoissonMode::baseline ? lambda_baseline(hawkes)
                                         : lambda_expectation_matched(hawkes, horizon);
}

PoissonField solve_poisson(const SolverGrid& grid, double lambda_p, const BreachModel& model,
                           const CostParams& costs, const SolverOptions& options) {
    if (!std::isfinite(lambda_p) || !(lambda_p > 0.0)) {
        throw ArgumentError("solve_poisson: intensity must be finite and > 0");
    }
    SolverGrid flat = grid;
    flat.lambda_min = lambda_p;
    flat.lambda_max = lambda_p;
    flat.d_lambda = 1.0;
    // xi only scales a drift that vanishes at alpha = lambda_p
    const Problem problem{HawkesParams(lambda_p, lambda_p, 1.0, 0.0), model, costs};
    auto solved = solve(flat, problem, options);

    FieldMeta meta = solved.value.meta();
    meta.one_dimensional = true;
    meta.poisson_intensity = lambda_p;
    return {ValueField(meta, solved.value.data()), PolicyField(meta, solved.policy.data()),
            std::move(solved.quality)};
}

} // namespace cyberinv
