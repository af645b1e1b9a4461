#include "cyberinv/strategy_eval.hpp"

#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"
#include "cyberinv/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>

namespace cyberinv {

namespace {

struct Simpson {
    int max_depth = 48;

    template <class F>
    double integrate(F&& f, double a, double b, double tol) const {
        if (b <= a) {
            return 0.0;
        }
        const double fa = f(a);
        const double fb = f(b);
        const double fm = f(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double out = refine(f, a, b, fa, fm, fb, whole, tol, max_depth);
        if (!std::isfinite(out)) {
            throw NumericalError("adaptive Simpson: non-finite integral");
        }
        return out;
    }

    template <class F>
    double refine(F& f, double a, double b, double fa, double fm, double fb, double whole,
                  double tol, int depth) const {
        const double m = 0.5 * (a + b);
        const double flm = f(0.5 * (a + m));
        const double frm = f(0.5 * (m + b));
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        if (depth <= 0) {
            std::ostringstream msg;
            msg << "adaptive Simpson: no convergence on [" << a << ", " << b << "]";
            throw NumericalError(msg.str());
        }
        return refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

double checked_rate(double z) {
    if (!std::isfinite(z) || z < 0.0) {
        std::ostringstream msg;
        msg << "deterministic strategy has an inadmissible rate " << z;
        throw PolicyError(msg.str());
    }
    return z;
}

template <class LambdaAt>
PolicyTrace trace_with(const PolicyField& field, LambdaAt&& lambda_at, double t_init,
                       double h_init, QueryMode mode, QueryDiagnostics* diag,
                       TraceSource source) {
    const auto& meta = field.meta();
    if (!std::isfinite(h_init) || h_init < 0.0) {
        throw ArgumentError("extract_policy: h_init must be finite and >= 0");
    }
    PolicyTrace trace;
    trace.source = source;
    trace.times = trace_times(t_init, meta.horizon(), meta.d_t());
    const double rho = meta.problem.costs.rho;
    const std::size_t n = trace.times.size();
    trace.intensity.reserve(n);
    trace.control.reserve(n);
    trace.level.reserve(n);
    double level = h_init;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = trace.times[i];
        const double lambda = lambda_at(t);
        const double z = field.query(t, lambda, level, mode, diag);
        trace.intensity.push_back(lambda);
        trace.control.push_back(z);
        trace.level.push_back(level);
        if (i + 1 < n) {
            level += (-rho * level + z) * (trace.times[i + 1] - t);
        }
    }
    return trace;
}

} // namespace

std::string_view to_string(TraceSource source) {
    switch (source) {
    case TraceSource::hawkes_optimal:
        return "hawkes_optimal";
    case TraceSource::poisson_deterministic:
        return "poisson_deterministic";
    case TraceSource::constant:
        return "constant";
    }
    return "hawkes_optimal";
}

InvestmentStrategy PolicyTrace::as_strategy() const {
    return PiecewiseConstantRate{times, control};
}

std::vector<double> trace_times(double t_init, double horizon, double d_t) {
    if (!(d_t > 0.0)) {
        throw ArgumentError("trace_times: d_t must be > 0");
    }
    if (!std::isfinite(t_init) || t_init < 0.0) {
        throw ArgumentError("trace_times: t_init must be finite and >= 0");
    }
    if (t_init > horizon * (1.0 + 1e-12)) {
        throw ArgumentError("extract_policy: t_init exceeds the horizon");
    }
    const double span = std::max(horizon - t_init, 0.0);
    const auto steps = static_cast<std::size_t>(std::ceil(span / d_t - 1e-9));
    std::vector<double> times(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) {
        times[i] = std::min(t_init + static_cast<double>(i) * d_t, horizon);
    }
    times[steps] = steps == 0 ? std::min(t_init, horizon) : horizon;
    return times;
}

PolicyTrace extract_policy(const PolicyField& field, const AttackPath& path, double t_init,
                           double h_init, QueryMode mode, QueryDiagnostics* diag) {
    if (path.horizon() < field.meta().horizon() * (1.0 - 1e-12)) {
        throw ArgumentError("extract_policy: path horizon is shorter than the field horizon");
    }
    IntensityCursor cursor(path);
    return trace_with(field, [&](double t) { return cursor.at(t); }, t_init, h_init, mode, diag,
                      TraceSource::hawkes_optimal);
}

PolicyTrace extract_policy_constant(const PolicyField& field, double lambda, double t_init,
                                    double h_init, QueryMode mode, QueryDiagnostics* diag) {
    const auto source = field.meta().one_dimensional ? TraceSource::poisson_deterministic
                                                     : TraceSource::constant;
    return trace_with(field, [lambda](double) { return lambda; }, t_init, h_init, mode, diag,
                      source);
}

void write_trace_csv(std::ostream& out, const PolicyTrace& trace) {
    out << "t,lambda,z,H\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        write_csv_row(out, trace.times[i], trace.intensity[i], trace.control[i], trace.level[i]);
    }
}

double evaluate_deterministic(double t, double lambda, double h, const InvestmentStrategy& strategy,
                              const Problem& problem) {
    const auto& c = problem.costs;
    const double horizon = c.horizon;
    if (!(t >= 0.0 && t <= horizon)) {
        throw ArgumentError("evaluate_deterministic: t must lie in [0, T]");
    }
    if (!std::isfinite(h) || h < 0.0) {
        throw ArgumentError("evaluate_deterministic: h must be finite and >= 0");
    }
    if (std::holds_alternative<FeedbackRule>(strategy)) {
        throw ArgumentError("evaluate_deterministic: strategy must not depend on the state");
    }
    const HawkesParams from_here = problem.hawkes.restarted_at(lambda);

    // break points: t, every knot inside (t, T), T
    std::vector<double> cuts{t};
    if (const auto* pw = std::get_if<PiecewiseConstantRate>(&strategy)) {
        for (double k : pw->knots) {
            if (k > t && k < horizon) {
                cuts.push_back(k);
            }
        }
    }
    cuts.push_back(horizon);
    auto rate_at = [&](double s) {
        if (const auto* cr = std::get_if<ConstantRate>(&strategy)) {
            return checked_rate(cr->rate);
        }
        return checked_rate(std::get<PiecewiseConstantRate>(strategy).rate_at(s));
    };

    const double scale = std::max(1.0, c.eta_mean * problem.breach.v *
                                           std::max(lambda, from_here.stationary_mean()) *
                                           (horizon - t));
    const double tol = 1e-10 * scale;
    const Simpson simpson;
    double level = h;
    double reward = 0.0;
    double cost = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) {
            continue;
        }
        const double z = rate_at(a);
        const double h_a = level;
        auto integrand = [&](double s) {
            const double hs = level_after(h_a, c.rho, z, s - a);
            return c.eta_mean * (problem.breach.v - breach_prob(problem.breach, hs)) *
                   expected_intensity(from_here, s - t);
        };
        reward += simpson.integrate(integrand, a, b, tol * (b - a) / std::max(horizon - t, 1e-300));
        cost += (c.delta * z + 0.5 * c.gamma * z * z) * (b - a);
        level = level_after(h_a, c.rho, z, b - a);
    }
    return reward - cost + c.utility(level);
}

double evaluate_constant(double t, double lambda, double h, double zbar, const Problem& problem) {
    if (!std::isfinite(zbar) || zbar < 0.0) {
        throw ArgumentError("evaluate_constant: zbar must be finite and >= 0");
    }
    return evaluate_deterministic(t, lambda, h, ConstantRate{zbar}, problem);
}

double lower_bound(double t, double lambda, double h, const Problem& problem) {
    const auto& c = problem.costs;
    if (!(t >= 0.0 && t <= c.horizon)) {
        throw ArgumentError("lower_bound: t must lie in [0, T]");
    }
    const double remaining = c.horizon - t;
    const double attacks = expected_count(problem.hawkes.restarted_at(lambda), remaining);
    const double keep = c.rho * h;
    return c.utility(h) - keep * (c.delta + 0.5 * c.gamma * keep) * remaining +
           c.eta_mean * (problem.breach.v - breach_prob(problem.breach, h)) * attacks;
}

double default_rate_cap(const Problem& problem) {
    const auto& c = problem.costs;
    const double lambda_max = lambda_max_heuristic(problem.hawkes, c.horizon);
    return std::max(10.0 * c.eta_mean * problem.breach.v * lambda_max / c.gamma, 1.0);
}

ConstantOptimum optimize_constant(double t, double lambda, double h, const Problem& problem,
                                  double z_cap) {
    if (!(z_cap > 0.0)) {
        z_cap = default_rate_cap(problem);
    }
    auto negated = [&](double z) { return -evaluate_constant(t, lambda, h, z, problem); };

    ConstantOptimum best{0.0, -negated(0.0)};
    const double top = -negated(z_cap);
    if (top > best.value) {
        best = {z_cap, top};
    }
    constexpr int pieces = 8;
    constexpr int bits = 36;
    double lo = 0.0;
    for (int i = 1; i <= pieces; ++i) {
        const double hi = z_cap * std::pow(10.0, i - pieces);
        std::uintmax_t iters = 200;
        const auto [z, f] = boost::math::tools::brent_find_minima(negated, lo, hi, bits, iters);
        if (-f > best.value) {
            best = {z, -f};
        }
        lo = hi;
    }
    return best;
}

double gain_vs_constant(double t, double lambda, double h, const ValueField& value,
                        const Problem& problem) {
    const double v = value.query(t, lambda, h, QueryMode::linear);
    const double j = optimize_constant(t, lambda, h, problem).value;
    if (!(j > 0.0)) {
        throw UndefinedGainError("gain against the best constant rate is undefined: J <= 0");
    }
    return 100.0 * (v - j) / j;
}

double gain_vs_poisson(double t, double lambda, double h, const ValueField& value,
                       const PoissonField& poisson, const Problem& problem) {
    const double v = value.query(t, lambda, h, QueryMode::linear);
    const auto trace = extract_policy_constant(poisson.policy, poisson.intensity(), t, h);
    const double j = evaluate_deterministic(t, lambda, h, trace.as_strategy(), problem);
    if (!(j > 0.0)) {
        throw UndefinedGainError("gain against the Poisson policy is undefined: J <= 0");
    }
    return 100.0 * (v - j) / j;
}

namespace {

template <class Gain>
std::vector<GainRow> gain_table(const std::vector<GainQuery>& queries, const std::string& label,
                                Gain&& gain) {
    std::vector<GainRow> rows(queries.size());
    parallel_chunks(queries.size(), 1, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& q = queries[i];
            rows[i] = {q.t, q.lambda, q.h, gain(q), label};
        }
    });
    return rows;
}

} // namespace

std::vector<GainRow> gain_table_constant(const std::vector<GainQuery>& queries,
                                         const ValueField& value, const Problem& problem) {
    return gain_table(queries, "constant", [&](const GainQuery& q) {
        return gain_vs_constant(q.t, q.lambda, q.h, value, problem);
    });
}

std::vector<GainRow> gain_table_poisson(const std::vector<GainQuery>& queries,
                                        const ValueField& value, const PoissonField& poisson,
                                        const Problem& problem, const std::string& label) {
    return gain_table(queries, label, [&](const GainQuery& q) {
        return gain_vs_poisson(q.t, q.lambda, q.h, value, poisson, problem);
    });
}

void write_gain_csv(std::ostream& out, const std::vector<GainRow>& rows) {
    out << "t,lambda,h,gain_pct,benchmark\n";
    for (const auto& r : rows) {
        write_csv_row(out, r.t, r.lambda, r.h, r.gain_pct, r.benchmark);
    }
}

} // namespace cyberinv
