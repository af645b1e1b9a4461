#pragma once

#include "cyberinv/rng.hpp"
#include "cyberinv/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cyberinv {

/// Exponential-kernel Hawkes intensity
///   d lambda_t = xi (alpha - lambda_t) dt + beta dN_t,  lambda_0 = lambda0.
/// Construction enforces beta < xi; every moment formula needs it.
class HawkesParams {
public:
    HawkesParams(double alpha, double lambda0, double xi, double beta);

    /// Standard set: alpha = lambda0 = 27, xi = 15, beta = 9 (events / year).
    static HawkesParams standard() { return {27.0, 27.0, 15.0, 9.0}; }

    double alpha() const { return alpha_; }
    double lambda0() const { return lambda0_; }
    double xi() const { return xi_; }
    double beta() const { return beta_; }

    /// Long-run mean alpha xi / (xi - beta).
    double stationary_mean() const { return alpha_ * xi_ / (xi_ - beta_); }

    /// Deterministic part alpha + (lambda0 - alpha) e^{-xi t}.
    double baseline(double t) const;

    /// Same dynamics restarted from intensity lambda at the current time.
    HawkesParams restarted_at(double lambda) const { return {alpha_, lambda, xi_, beta_}; }

    friend bool operator==(const HawkesParams&, const HawkesParams&) = default;

private:
    double alpha_;
    double lambda0_;
    double xi_;
    double beta_;
};

/// One realisation of the attack process on [0, horizon].
class AttackPath {
public:
    AttackPath(HawkesParams params, double horizon, std::vector<double> event_times);

    const HawkesParams& params() const { return params_; }
    double horizon() const { return horizon_; }
    const std::vector<double>& event_times() const { return events_; }
    std::size_t size() const { return events_.size(); }

    /// Right-continuous lambda_t (events at exactly t included).
    double intensity(double t) const;
    /// Left limit lambda_{t-} (events at exactly t excluded).
    double intensity_left(double t) const;

    /// Number of events in (0, t].
    std::size_t count_until(double t) const;

private:
    HawkesParams params_;
    double horizon_;
    std::vector<double> events_;
};

/// Evaluates lambda along a path at nondecreasing times in O(1) amortised,
/// carrying the excitation sum forward instead of re-summing the history.
class IntensityCursor {
public:
    explicit IntensityCursor(const AttackPath& path);

    /// Right-continuous intensity at t; t must not decrease between calls.
    double at(double t);
    /// Left limit at t; t must not decrease between calls.
    double left_at(double t);

private:
    void advance_excitation(double t, bool include_t);

    const AttackPath* path_;
    std::size_t next_ = 0;
    double exc_time_ = 0.0;
    double excitation_ = 0.0;
};

/// Candidate step recorded by the thinning sampler.
struct ThinningStep {
    double time;
    double intensity;
    double bound;
    bool accepted;
};

/// Ogata thinning. Between events the excitation decays and the baseline
/// moves monotonically towards alpha, so
///   lambda(t) + max(0, alpha - baseline(t))
/// bounds the intensity until the next event. When trace is non-null every
/// candidate is recorded.
AttackPath simulate_path(const HawkesParams& params, double horizon, CounterRng& rng,
                         std::vector<ThinningStep>* trace = nullptr);
AttackPath simulate_path(const HawkesParams& params, double horizon, std::uint64_t seed);

/// E[lambda_t].
double expected_intensity(const HawkesParams& params, double t);
/// E[N_t] = integral of E[lambda_s] over [0, t].
double expected_count(const HawkesParams& params, double t);

/// Var(lambda_t) from the moment system
///   m1' = xi alpha - (xi - beta) m1,
///   v'  = -2 (xi - beta) v + beta^2 m1,
/// integrated with the stiff Rosenbrock integrator.
double intensity_variance(const HawkesParams& params, double t);

struct CountMoments {
    Estimate mean;
    Estimate variance;
};

/// Monte Carlo moments of N_t over independent paths from Stream::paths.
CountMoments simulate_count_moments(const HawkesParams& params, double t,
                                    std::size_t mc_paths, std::uint64_t seed);

/// Monte Carlo Var(N_t); mc_paths must be at least 10^4.
Estimate count_variance(const HawkesParams& params, double t, std::size_t mc_paths,
                        std::uint64_t seed);

/// Truncation level E[lambda_T] + 7 sqrt(Var(lambda_T)) for the intensity grid.
double lambda_max_heuristic(const HawkesParams& params, double horizon);

} // namespace cyberinv
