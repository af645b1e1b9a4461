#include "cyberinv/hawkes.hpp"

#include "cyberinv/errors.hpp"
#include "cyberinv/parallel.hpp"
#include "cyberinv/stiff_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cyberinv {

namespace {

void require_finite_positive(double value, const char* name) {
    if (!std::isfinite(value) || !(value > 0.0)) {
        std::ostringstream msg;
        msg << "HawkesParams: " << name << " must be finite and > 0 (got " << value << ")";
        throw ArgumentError(msg.str());
    }
}

void require_time(double t, const char* where) {
    if (!std::isfinite(t) || t < 0.0) {
        throw ArgumentError(std::string(where) + ": time must be finite and >= 0");
    }
}

} // namespace

HawkesParams::HawkesParams(double alpha, double lambda0, double xi, double beta)
    : alpha_(alpha), lambda0_(lambda0), xi_(xi), beta_(beta) {
    require_finite_positive(alpha, "alpha");
    require_finite_positive(lambda0, "lambda0");
    require_finite_positive(xi, "xi");
    if (!std::isfinite(beta) || beta < 0.0) {
        throw ArgumentError("HawkesParams: beta must be finite and >= 0");
    }
    if (!(beta < xi)) {
        std::ostringstream msg;
        msg << "HawkesParams: stability condition beta < xi violated (beta=" << beta
            << ", xi=" << xi << ")";
        throw StabilityError(msg.str());
    }
}

double HawkesParams::baseline(double t) const {
    return alpha_ + (lambda0_ - alpha_) * std::exp(-xi_ * t);
}

AttackPath::AttackPath(HawkesParams params, double horizon, std::vector<double> event_times)
    : params_(params), horizon_(horizon), events_(std::move(event_times)) {
    if (!std::isfinite(horizon) || !(horizon > 0.0)) {
        throw ArgumentError("AttackPath: horizon must be finite and > 0");
    }
    double prev = 0.0;
    for (double tau : events_) {
        if (!(tau > prev) || tau > horizon_) {
            throw ArgumentError("AttackPath: event times must be strictly increasing in (0, T]");
        }
        prev = tau;
    }
}

double AttackPath::intensity(double t) const {
    double lambda = params_.baseline(t);
    for (double tau : events_) {
        if (tau > t) {
            break;
        }
        lambda += params_.beta() * std::exp(-params_.xi() * (t - tau));
    }
    return lambda;
}

double AttackPath::intensity_left(double t) const {
    double lambda = params_.baseline(t);
    for (double tau : events_) {
        if (tau >= t) {
            break;
        }
        lambda += params_.beta() * std::exp(-params_.xi() * (t - tau));
    }
    return lambda;
}

std::size_t AttackPath::count_until(double t) const {
    return static_cast<std::size_t>(std::upper_bound(events_.begin(), events_.end(), t) -
                                    events_.begin());
}

IntensityCursor::IntensityCursor(const AttackPath& path) : path_(&path) {}

void IntensityCursor::advance_excitation(double t, bool include_t) {
    const auto& events = path_->event_times();
    const double xi = path_->params().xi();
    const double beta = path_->params().beta();
    while (next_ < events.size() &&
           (events[next_] < t || (include_t && events[next_] == t))) {
        const double tau = events[next_];
        excitation_ = excitation_ * std::exp(-xi * (tau - exc_time_)) + beta;
        exc_time_ = tau;
        ++next_;
    }
}

double IntensityCursor::at(double t) {
    advance_excitation(t, true);
    const auto& p = path_->params();
    return p.baseline(t) + excitation_ * std::exp(-p.xi() * (t - exc_time_));
}

double IntensityCursor::left_at(double t) {
    advance_excitation(t, false);
    const auto& p = path_->params();
    return p.baseline(t) + excitation_ * std::exp(-p.xi() * (t - exc_time_));
}

AttackPath simulate_path(const HawkesParams& params, double horizon, CounterRng& rng,
                         std::vector<ThinningStep>* trace) {
    if (!std::isfinite(horizon) || !(horizon > 0.0)) {
        throw ArgumentError("simulate_path: horizon must be finite and > 0");
    }
    const double xi = params.xi();
    std::vector<double> events;
    double t = 0.0;
    double excitation = 0.0;  // beta * sum exp(-xi (t - tau_i)) at time t
    for (;;) {
        const double base = params.baseline(t);
        const double bound = base + excitation + std::max(0.0, params.alpha() - base);
        const double wait = rng.exponential(bound);
        const double candidate = t + wait;
        if (candidate > horizon) {
            break;
        }
        excitation *= std::exp(-xi * wait);
        const double lambda = params.baseline(candidate) + excitation;
        const bool accept = rng.uniform() * bound <= lambda;
        if (trace != nullptr) {
            trace->push_back({candidate, lambda, bound, accept});
        }
        t = candidate;
        if (accept) {
            // guard against duplicate times from a zero-length wait
            if (events.empty() || candidate > events.back()) {
                events.push_back(candidate);
                excitation += params.beta();
            }
        }
    }
    return AttackPath(params, horizon, std::move(events));
}

AttackPath simulate_path(const HawkesParams& params, double horizon, std::uint64_t seed) {
    CounterRng rng(seed, Stream::paths, 0);
    return simulate_path(params, horizon, rng);
}

double expected_intensity(const HawkesParams& params, double t) {
    require_time(t, "expected_intensity");
    const double c = params.stationary_mean();
    return c + std::exp(-(params.xi() - params.beta()) * t) * (params.lambda0() - c);
}

double expected_count(const HawkesParams& params, double t) {
    require_time(t, "expected_count");
    const double k = params.xi() - params.beta();
    const double c = params.stationary_mean();
    // -(e^{-k t} - 1) / k, written with expm1 for small k t
    return c * t - (params.lambda0() - c) * std::expm1(-k * t) / k;
}

double intensity_variance(const HawkesParams& params, double t) {
    require_time(t, "intensity_variance");
    if (t == 0.0 || params.beta() == 0.0) {
        return 0.0;
    }
    const double xi = params.xi();
    const double alpha = params.alpha();
    const double beta = params.beta();
    const double k = xi - beta;

    OdeSystem system;
    system.rhs = [=](const Vector& y, Vector& dy) {
        dy.resize(2);
        dy[0] = xi * alpha - k * y[0];
        dy[1] = -2.0 * k * y[1] + beta * beta * y[0];
    };
    system.jacobian = [=](const Vector&, SparseMatrix& jac) {
        if (jac.rows() != 2) {
            jac.resize(2, 2);
            jac.insert(0, 0) = -k;
            jac.insert(1, 0) = beta * beta;
            jac.insert(1, 1) = -2.0 * k;
            jac.makeCompressed();
        }
    };
    IntegratorOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-10;
    opts.initial_step = std::min(1e-6, t);
    RosenbrockIntegrator integrator(std::move(system), opts);
    Vector y(2);
    y << params.lambda0(), 0.0;
    integrator.integrate(y, 0.0, t);
    return std::max(0.0, y[1]);
}

CountMoments simulate_count_moments(const HawkesParams& params, double t,
                                    std::size_t mc_paths, std::uint64_t seed) {
    require_time(t, "simulate_count_moments");
    if (t == 0.0) {
        return {};
    }
    constexpr std::size_t kChunk = 2048;
    const std::size_t n_chunks = (mc_paths + kChunk - 1) / kChunk;
    const double shift = std::round(expected_count(params, t));
    std::vector<SampleMoments> partial(n_chunks, SampleMoments(shift));
    parallel_chunks(mc_paths, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, Stream::paths, i);
            partial[c].add(static_cast<double>(simulate_path(params, t, rng).size()));
        }
    });
    SampleMoments total(shift);
    for (const auto& p : partial) {
        total.merge(p);
    }
    return {total.mean_estimate(), total.variance_estimate()};
}

Estimate count_variance(const HawkesParams& params, double t, std::size_t mc_paths,
                        std::uint64_t seed) {
    if (mc_paths < 10'000) {
        throw ArgumentError("count_variance: mc_paths must be at least 10^4");
    }
    return simulate_count_moments(params, t, mc_paths, seed).variance;
}

double lambda_max_heuristic(const HawkesParams& params, double horizon) {
    return expected_intensity(params, horizon) +
           7.0 * std::sqrt(intensity_variance(params, horizon));
}

} // namespace cyberinv
