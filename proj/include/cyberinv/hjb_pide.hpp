#pragma once

#include "cyberinv/problem.hpp"
#include "cyberinv/stiff_integrator.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cyberinv {

/// Rectangular (lambda, h) grid plus the spacing of the stored time snapshots.
/// A single lambda node (lambda_min == lambda_max) is allowed; the lambda
/// derivative is then zero, which is how the one-dimensional Poisson problem
/// runs through the same kernel.
struct SolverGrid {
    double lambda_min = 27.0;
    double lambda_max = 216.0;
    double d_lambda = 1.0;
    double h_min = 0.0;
    double h_max = 50.0;
    double d_h = 0.5;
    std::size_t snapshot_intervals = 200;  ///< d_t = horizon / snapshot_intervals

    /// Full grid used for the published value surface.
    static SolverGrid reference() { return {}; }
    /// Desk-scale preset: d_lambda = 3, d_h = 1, lambda_max = 120.
    static SolverGrid coarse() { return {27.0, 120.0, 3.0, 0.0, 50.0, 1.0, 200}; }

    /// Same bounds, both spatial steps divided by `factor`.
    SolverGrid refined(double factor) const;

    /// Throws ArgumentError unless steps are positive, h_min >= 0, and both
    /// spans are integer multiples of their steps.
    void validate() const;

    std::size_t n_lambda() const;
    std::size_t n_h() const;
    std::size_t nodes() const { return n_lambda() * n_h(); }
    double lambda_at(std::size_t n) const { return lambda_min + static_cast<double>(n) * d_lambda; }
    double h_at(std::size_t m) const { return h_min + static_cast<double>(m) * d_h; }

    friend bool operator==(const SolverGrid&, const SolverGrid&) = default;
};

enum class JumpShift {
    floor,        ///< V(lambda + beta) ~ V at index n + floor(beta) / d_lambda (rounded down)
    interpolate,  ///< linear interpolation between the two bracketing nodes
};

enum class QueryMode { nearest, linear };

JumpShift parse_jump_shift(std::string_view name);
std::string_view to_string(JumpShift mode);
QueryMode parse_query_mode(std::string_view name);
std::string_view to_string(QueryMode mode);

struct SolverOptions {
    double rtol = 1e-6;
    double atol = 1e-8;
    bool upwind = false;
    JumpShift jump_shift = JumpShift::floor;
    QueryMode query = QueryMode::nearest;
    /// Above this many stored doubles (nodes x snapshots) a solve with a
    /// snapshot sink streams snapshots out instead of keeping them.
    std::size_t stream_threshold = 50'000'000;

    friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

/// Per-node breakdown of the backward-time generator
///   F = drift_lambda + drift_h + jump + reward + hamiltonian,
/// with dV/dt = -F.
struct NodeTerms {
    double drift_lambda = 0.0;  ///< xi (alpha - lambda) dV/dlambda
    double drift_h = 0.0;       ///< -rho h dV/dh
    double jump = 0.0;          ///< lambda (V(lambda + beta) - V)
    double reward = 0.0;        ///< eta_mean (v - S(h)) lambda
    double hamiltonian = 0.0;   ///< ((dV/dh - delta)^+)^2 / (2 gamma)

    double total() const { return drift_lambda + drift_h + jump + reward + hamiltonian; }
};

/// Discretised HJB-PIDE generator on a SolverGrid. State vectors are laid
/// out lambda-major: index n * n_h + m.
class HjbOperator {
public:
    HjbOperator(SolverGrid grid, Problem problem, SolverOptions options = {});

    const SolverGrid& grid() const { return grid_; }
    const Problem& problem() const { return problem_; }
    const SolverOptions& options() const { return options_; }

    /// Jump shift in lambda-index units and whether it is exact on the grid.
    double jump_shift() const { return shift_; }
    bool jump_shift_exact() const { return shift_exact_; }

    /// Forward-time derivative dV/dt = -F(V). Throws NumericalError on NaN.
    void time_derivative(const Vector& state, Vector& dvdt) const;
    /// Jacobian of the backward-time right-hand side F(V) (dV/dtau, tau = T - t).
    void backward_jacobian(const Vector& state, SparseMatrix& jac) const;

    NodeTerms node_terms(const Vector& state, std::size_t n, std::size_t m) const;

    /// The discrete dV/dh entering the Hamiltonian and the policy.
    double policy_gradient(const Vector& state, std::size_t n, std::size_t m) const;
    /// z* = max(dV/dh - delta, 0) / gamma with the solver's own dV/dh.
    double policy(const Vector& state, std::size_t n, std::size_t m) const;

private:
    struct Stencil {
        std::size_t lo;
        std::size_t hi;
        double scale;  ///< derivative = (V[hi] - V[lo]) * scale; 0 on a degenerate axis
    };
    Stencil lambda_stencil(std::size_t n, bool upwind_forward) const;
    Stencil h_stencil(std::size_t m, int direction) const;
    Stencil drift_lambda_stencil(std::size_t n) const;
    Stencil drift_h_stencil(std::size_t m) const;
    Stencil hamiltonian_h_stencil(std::size_t m) const;

    SolverGrid grid_;
    Problem problem_;
    SolverOptions options_;
    std::size_t nl_;
    std::size_t nh_;
    double shift_;
    bool shift_exact_;
    std::size_t shift_lo_;
    double shift_weight_;
    std::vector<double> reward_;  ///< eta_mean (v - S(h_m)) per h node
};

/// Forward-time derivative of a flat state under the default options.
Vector assemble_rhs(const Vector& state, const SolverGrid& grid, const HawkesParams& hawkes,
                    const BreachModel& model, const CostParams& costs);

/// Description of a solved surface; persisted alongside the data.
struct FieldMeta {
    SolverGrid grid;
    Problem problem;
    SolverOptions options;
    bool one_dimensional = false;   ///< Poisson field: lambda axis is a constant
    double poisson_intensity = 0.0; ///< lambda^P for one-dimensional fields
    /// Values for lambda above lambda_max are those at lambda_max.
    std::string lambda_extrapolation = "constant-above-lambda-max";

    double horizon() const { return problem.costs.horizon; }
    double d_t() const { return horizon() / static_cast<double>(grid.snapshot_intervals); }
    std::size_t snapshots() const { return grid.snapshot_intervals + 1; }
    double time_at(std::size_t k) const;
    /// Index of the snapshot nearest to t.
    std::size_t nearest_snapshot(double t) const;

    friend bool operator==(const FieldMeta&, const FieldMeta&) = default;
};

/// Counts queries whose h had to be clamped into [h_min, h_max].
struct QueryDiagnostics {
    std::size_t h_clamped = 0;
};

/// Dense surface over (snapshot, lambda, h), row-major in that order, with
/// snapshot k at time k * d_t.
class GridSurface {
public:
    GridSurface() = default;
    GridSurface(FieldMeta meta, std::vector<double> data);

    const FieldMeta& meta() const { return meta_; }
    const std::vector<double>& data() const { return data_; }
    bool empty() const { return data_.empty(); }

    double at(std::size_t k, std::size_t n, std::size_t m) const;
    std::span<const double> snapshot(std::size_t k) const;

    /// Lookup at (t, lambda, h). lambda is clamped to the grid (extrapolation
    /// rule) and ignored for one-dimensional fields; h outside the grid is
    /// clamped and counted in diag. t must lie in [0, T].
    double query(double t, double lambda, double h, QueryMode mode,
                 QueryDiagnostics* diag = nullptr) const;
    double query(double t, double lambda, double h, QueryDiagnostics* diag = nullptr) const {
        return query(t, lambda, h, meta_.options.query, diag);
    }

private:
    FieldMeta meta_;
    std::vector<double> data_;
};

struct ValueField : GridSurface {
    using GridSurface::GridSurface;
};
struct PolicyField : GridSurface {
    using GridSurface::GridSurface;
};

struct ResidualCheck {
    double t = 0.0;
    double interior = 0.0;
    double boundary = 0.0;
};

struct QualityReport {
    IntegratorStats integrator;
    double wall_seconds = 0.0;
    double terminal_error = 0.0;            ///< max |V(T) - U|
    std::size_t monotonicity_checked = 0;   ///< node comparisons over all snapshots
    std::size_t monotonicity_violations = 0;
    std::vector<ResidualCheck> residuals;
    bool streamed = false;
    std::vector<std::string> warnings;

    double violation_fraction() const;
};

struct SolveResult {
    ValueField value;
    PolicyField policy;
    QualityReport quality;
};

/// Receives snapshot k (values, controls) as soon as it is computed; k runs
/// from the terminal snapshot down to 0.
using SnapshotSink =
    std::function<void(std::size_t k, std::span<const double> value, std::span<const double> policy)>;

/// Method-of-lines solve backward from V(T) = U(h). When a sink is given,
/// every snapshot is passed to it; if in addition the field exceeds
/// options.stream_threshold doubles, snapshots are not retained and the
/// returned fields are empty (quality.streamed = true). Throws SolverError
/// with integrator diagnostics on failure.
SolveResult solve(const SolverGrid& grid, const Problem& problem, const SolverOptions& options = {},
                  const SnapshotSink& sink = {});

/// Max |dV/dt + F(V)| at snapshot k, with dV/dt the central difference of
/// the neighbouring snapshots. boundary=false covers interior nodes only,
/// boundary=true only the outer ring.
double hjb_residual(const ValueField& field, std::size_t k, bool boundary = false);

/// Counts nodes, over all snapshots, whose value falls below its lower
/// lambda or h neighbour by more than tol * max|V| of that snapshot.
std::size_t count_monotonicity_violations(const ValueField& field, double tol,
                                          std::size_t* checked = nullptr);

} // namespace cyberinv
