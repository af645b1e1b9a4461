#pragma once

#include "cyberinv/hjb_pide.hpp"

#include <string_view>

namespace cyberinv {

/// lambda^P_b = lambda0: a Poisson rate equal to the Hawkes starting intensity.
double lambda_baseline(const HawkesParams& hawkes);

/// lambda^P_e, the constant rate meant to match the expected attack count:
///   c + (1 - e^{-xi T}) / (T (xi - beta)) (lambda0 - c),  c = lambda0 xi / (xi - beta).
/// This is the formula as published; expected_count(T) / T differs slightly
/// because the exact decay rate is xi - beta.
double lambda_expectation_matched(const HawkesParams& hawkes, double horizon);

enum class PoissonMode { baseline, expectation };

PoissonMode parse_poisson_mode(std::string_view name);
std::string_view to_string(PoissonMode mode);

double poisson_intensity(PoissonMode mode, const HawkesParams& hawkes, double horizon);

/// One-dimensional field V^P(t, h), z^P*(t, h) under a constant attack rate.
/// Stored as a GridSurface with one lambda node and meta().one_dimensional set.
struct PoissonField {
    ValueField value;
    PolicyField policy;
    QualityReport quality;

    double intensity() const { return value.meta().poisson_intensity; }
};

/// Solves the deterministic-rate problem with the same kernel as the full
/// PIDE: the h axis of `grid` is kept, the lambda axis collapses to the
/// single node lambda_p and the Hawkes dynamics become alpha = lambda0 =
/// lambda_p, beta = 0 (no drift, no jump term).
PoissonField solve_poisson(const SolverGrid& grid, double lambda_p, const BreachModel& model,
                           const CostParams& costs, const SolverOptions& options = {});

} // namespace cyberinv
