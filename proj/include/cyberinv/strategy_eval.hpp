#pragma once

#include "cyberinv/hjb_pide.hpp"
#include "cyberinv/poisson_benchmark.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cyberinv {

enum class TraceSource { hawkes_optimal, poisson_deterministic, constant };

std::string_view to_string(TraceSource source);

/// Control applied along one intensity path on a uniform time grid.
/// level[i + 1] = level[i] + (-rho level[i] + control[i]) (times[i + 1] - times[i]).
struct PolicyTrace {
    std::vector<double> times;
    std::vector<double> intensity;
    std::vector<double> control;
    std::vector<double> level;
    TraceSource source = TraceSource::hawkes_optimal;

    /// Piecewise-constant rate control[i] on [times[i], times[i + 1]).
    InvestmentStrategy as_strategy() const;
};

/// Time grid t_init, t_init + d_t, ..., T (last step shortened if needed).
std::vector<double> trace_times(double t_init, double horizon, double d_t);

/// Feedback extraction along a path: at each grid time look up
/// z*(t_i, lambda_{t_i}, H_{t_i}) in the field, then take an explicit Euler
/// step of the level. Throws ArgumentError when t_init > T.
PolicyTrace extract_policy(const PolicyField& field, const AttackPath& path, double t_init,
                           double h_init, QueryMode mode = QueryMode::nearest,
                           QueryDiagnostics* diag = nullptr);

/// Same lookup with the intensity frozen at `lambda`; this is how the
/// deterministic Poisson policy is read off a one-dimensional field.
PolicyTrace extract_policy_constant(const PolicyField& field, double lambda, double t_init,
                                    double h_init, QueryMode mode = QueryMode::nearest,
                                    QueryDiagnostics* diag = nullptr);

void write_trace_csv(std::ostream& out, const PolicyTrace& trace);

/// J(t, lambda, h; z) for a deterministic (constant or piecewise-constant)
/// strategy: the level follows its exact ODE solution and
///   J = int_t^T [eta_mean (v - S(H_s)) E[lambda_s] - delta z_s - gamma z_s^2 / 2] ds + U(H_T)
/// with E[lambda_s] conditional on lambda_t = lambda. The reward integral uses
/// adaptive Simpson. Feedback rules are rejected with ArgumentError.
double evaluate_deterministic(double t, double lambda, double h, const InvestmentStrategy& strategy,
                              const Problem& problem);

double evaluate_constant(double t, double lambda, double h, double zbar, const Problem& problem);

/// Closed form of J for the level-preserving rate zbar = rho h:
///   U(h) - rho h (delta + gamma rho h / 2)(T - t) + eta_mean (v - S(h)) E[int_t^T lambda_s ds].
double lower_bound(double t, double lambda, double h, const Problem& problem);

struct ConstantOptimum {
    double zbar = 0.0;
    double value = 0.0;
};

/// Default search cap 10 eta_mean v lambda_max / gamma with lambda_max from
/// lambda_max_heuristic.
double default_rate_cap(const Problem& problem);

/// Maximises evaluate_constant over [0, z_cap] (z_cap <= 0 selects the
/// default) by Brent searches on 8 geometrically growing subintervals.
ConstantOptimum optimize_constant(double t, double lambda, double h, const Problem& problem,
                                  double z_cap = 0.0);

/// 100 (V - J*) / J* against the best constant rate. V is read from the
/// field with linear interpolation so off-node h are usable. Throws
/// UndefinedGainError when J* <= 0.
double gain_vs_constant(double t, double lambda, double h, const ValueField& value,
                        const Problem& problem);

/// 100 (V - J) / J with J the value of the deterministic Poisson policy
/// read from `poisson` at constant intensity, starting from (t, h).
double gain_vs_poisson(double t, double lambda, double h, const ValueField& value,
                       const PoissonField& poisson, const Problem& problem);

struct GainQuery {
    double t;
    double lambda;
    double h;
};

struct GainRow {
    double t;
    double lambda;
    double h;
    double gain_pct;
    std::string benchmark;
};

/// Evaluates the queries in parallel; rows come back in query order.
std::vector<GainRow> gain_table_constant(const std::vector<GainQuery>& queries,
                                         const ValueField& value, const Problem& problem);
std::vector<GainRow> gain_table_poisson(const std::vector<GainQuery>& queries,
                                        const ValueField& value, const PoissonField& poisson,
                                        const Problem& problem, const std::string& label);

void write_gain_csv(std::ostream& out, const std::vector<GainRow>& rows);

} // namespace cyberinv
