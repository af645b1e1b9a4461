#include "cyberinv/cyber_dynamics.hpp"

#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"
#include "cyberinv/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace cyberinv {

TerminalUtility TerminalUtility::power(double exponent) {
    if (!(exponent > 0.0 && exponent <= 1.0)) {
        throw ArgumentError("power utility exponent must lie in (0, 1]");
    }
    return TerminalUtility(Kind::power, exponent);
}

TerminalUtility TerminalUtility::parse(std::string_view text) {
    if (text == "sqrt") {
        return sqrt();
    }
    if (text == "zero") {
        return zero();
    }
    if (text == "log1p") {
        return log1p();
    }
    if (text.starts_with("power:")) {
        const std::string arg(text.substr(6));
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != arg.size() || arg.empty()) {
            throw ArgumentError("power utility: cannot parse exponent '" + arg + "'");
        }
        return power(p);
    }
    throw ArgumentError("unknown utility '" + std::string(text) +
                        "' (expected sqrt, zero, log1p or power:<p>)");
}

std::string TerminalUtility::to_string() const {
    switch (kind_) {
    case Kind::sqrt:
        return "sqrt";
    case Kind::zero:
        return "zero";
    case Kind::log1p:
        return "log1p";
    case Kind::power:
        return "power:" + format_number(exponent_);
    }
    return "sqrt";
}

double TerminalUtility::operator()(double h) const {
    switch (kind_) {
    case Kind::sqrt:
        return std::sqrt(h);
    case Kind::zero:
        return 0.0;
    case Kind::log1p:
        return std::log1p(h);
    case Kind::power:
        return std::pow(h, exponent_);
    }
    return 0.0;
}

LossFamily parse_loss_family(std::string_view name) {
    if (name == "lognormal") {
        return LossFamily::lognormal;
    }
    if (name == "gamma") {
        return LossFamily::gamma;
    }
    if (name == "deterministic") {
        return LossFamily::deterministic;
    }
    throw ArgumentError("unknown loss family '" + std::string(name) +
                        "' (expected lognormal, gamma or deterministic)");
}

std::string_view to_string(LossFamily family) {
    switch (family) {
    case LossFamily::lognormal:
        return "lognormal";
    case LossFamily::gamma:
        return "gamma";
    case LossFamily::deterministic:
        return "deterministic";
    }
    return "lognormal";
}

void CostParams::validate() const {
    auto positive = [](double x, const char* name) {
        if (!std::isfinite(x) || !(x > 0.0)) {
            throw ArgumentError(std::string("CostParams: ") + name + " must be finite and > 0");
        }
    };
    auto nonnegative = [](double x, const char* name) {
        if (!std::isfinite(x) || x < 0.0) {
            throw ArgumentError(std::string("CostParams: ") + name + " must be finite and >= 0");
        }
    };
    positive(delta, "delta");
    positive(gamma, "gamma");
    positive(eta_mean, "eta_mean");
    nonnegative(eta_var, "eta_var");
    nonnegative(rho, "rho");
    positive(horizon, "horizon");

    // sampled check of U: nondecreasing with nonpositive second differences
    constexpr double step = 0.25;
    double prev = utility(0.0);
    double prev_diff = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double cur = utility(step * i);
        const double diff = cur - prev;
        if (diff < -1e-12 || (i > 1 && diff - prev_diff > 1e-12)) {
            throw ArgumentError("CostParams: terminal utility must be increasing and concave");
        }
        prev = cur;
        prev_diff = diff;
    }
}

double draw_loss(const CostParams& costs, CounterRng& rng) {
    if (costs.loss_family == LossFamily::deterministic || costs.eta_var == 0.0) {
        return costs.eta_mean;
    }
    if (costs.loss_family == LossFamily::lognormal) {
        const double s2 = std::log1p(costs.eta_var / (costs.eta_mean * costs.eta_mean));
        const double mu = std::log(costs.eta_mean) - 0.5 * s2;
        return std::exp(mu + std::sqrt(s2) * rng.normal());
    }
    const double shape = costs.eta_mean * costs.eta_mean / costs.eta_var;
    const double scale = costs.eta_var / costs.eta_mean;
    std::gamma_distribution<double> dist(shape, scale);
    return dist(rng);
}

double PiecewiseConstantRate::rate_at(double t) const {
    if (rates.empty()) {
        return 0.0;
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    if (it == knots.begin()) {
        return rates.front();
    }
    const auto i = static_cast<std::size_t>(it - knots.begin()) - 1;
    return rates[std::min(i, rates.size() - 1)];
}

double level_after(double h, double rho, double rate, double dt) {
    if (rho == 0.0) {
        return h + rate * dt;
    }
    const double decay = std::exp(-rho * dt);
    return h * decay - (rate / rho) * std::expm1(-rho * dt);
}

namespace {

double checked_rate(double z) {
    if (!std::isfinite(z) || z < 0.0) {
        std::ostringstream msg;
        msg << "investment strategy returned an inadmissible rate " << z;
        throw PolicyError(msg.str());
    }
    return z;
}

struct LevelAdvancer {
    double h;
    double t0;
    double t1;
    double rho;
    const AttackPath* path;

    double operator()(const ConstantRate& s) const {
        return level_after(h, rho, checked_rate(s.rate), t1 - t0);
    }

    double operator()(const PiecewiseConstantRate& s) const {
        double level = h;
        double t = t0;
        auto it = std::upper_bound(s.knots.begin(), s.knots.end(), t0);
        while (t < t1) {
            const double piece_end = it == s.knots.end() ? t1 : std::min(*it, t1);
            level = level_after(level, rho, checked_rate(s.rate_at(t)), piece_end - t);
            t = piece_end;
            if (it != s.knots.end()) {
                ++it;
            }
        }
        return level;
    }

    double operator()(const FeedbackRule& s) const {
        if (!s.rate) {
            throw PolicyError("feedback strategy has no rate callback");
        }
        const double span = t1 - t0;
        const int n = std::max(1, static_cast<int>(std::ceil(span / 1e-3)));
        const double dt = span / n;
        auto lambda_left = [&](double t) {
            return path != nullptr ? path->intensity_left(t)
                                   : std::numeric_limits<double>::quiet_NaN();
        };
        auto f = [&](double t, double level) {
            return checked_rate(s.rate({t, lambda_left(t), level})) - rho * level;
        };
        double level = h;
        for (int i = 0; i < n; ++i) {
            const double t = t0 + i * dt;
            const double k1 = f(t, level);
            const double k2 = f(t + 0.5 * dt, level + 0.5 * dt * k1);
            const double k3 = f(t + 0.5 * dt, level + 0.5 * dt * k2);
            const double k4 = f(t + dt, level + dt * k3);
            level += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        return level;
    }
};

} // namespace

double advance_level(double h, double t0, double t1, double rho,
                     const InvestmentStrategy& strategy, const AttackPath* path) {
    if (!(t1 >= t0)) {
        throw ArgumentError("advance_level: t1 must not precede t0");
    }
    if (t1 == t0) {
        return h;
    }
    return std::visit(LevelAdvancer{h, t0, t1, rho, path}, strategy);
}

std::vector<double> evolve_level(double h0, double rho, const InvestmentStrategy& strategy,
                                 const std::vector<double>& times, const AttackPath* path) {
    if (!std::isfinite(h0) || h0 < 0.0) {
        throw ArgumentError("evolve_level: h0 must be finite and >= 0");
    }
    std::vector<double> levels;
    levels.reserve(times.size());
    double h = h0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            if (!(times[i] > times[i - 1])) {
                throw ArgumentError("evolve_level: times must be strictly increasing");
            }
            h = advance_level(h, times[i - 1], times[i], rho, strategy, path);
        }
        levels.push_back(h);
    }
    return levels;
}

AttackMarks draw_marks(std::size_t n_attacks, const CostParams& costs, std::uint64_t seed,
                       std::uint64_t index) {
    AttackMarks marks;
    marks.breach_uniform.resize(n_attacks);
    marks.loss.resize(n_attacks);
    CounterRng breach_rng(seed, Stream::breach, index);
    CounterRng loss_rng(seed, Stream::losses, index);
    for (std::size_t i = 0; i < n_attacks; ++i) {
        marks.breach_uniform[i] = breach_rng.uniform();
        marks.loss[i] = draw_loss(costs, loss_rng);
    }
    return marks;
}

LossSample simulate_loss(const AttackPath& path, const AttackMarks& marks,
                         const BreachModel& model, const CostParams& costs,
                         const InvestmentStrategy& strategy, double h0) {
    const auto& events = path.event_times();
    if (marks.breach_uniform.size() < events.size() || marks.loss.size() < events.size()) {
        throw ArgumentError("simulate_loss: fewer marks than attacks");
    }
    LossSample out;
    out.n_attacks = events.size();
    double h = h0;
    double t = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        h = advance_level(h, t, events[i], costs.rho, strategy, &path);
        t = events[i];
        if (marks.breach_uniform[i] < breach_prob(model, h)) {
            ++out.n_breaches;
            out.gross_loss += marks.loss[i];
        }
    }
    out.terminal_h = advance_level(h, t, path.horizon(), costs.rho, strategy, &path);
    return out;
}

LossSample simulate_loss(const AttackPath& path, const BreachModel& model,
                         const CostParams& costs, const InvestmentStrategy& strategy,
                         std::uint64_t seed, std::uint64_t index, double h0) {
    const auto marks = draw_marks(path.size(), costs, seed, index);
    return simulate_loss(path, marks, model, costs, strategy, h0);
}

double expected_loss_no_investment(const HawkesParams& hawkes, const BreachModel& model,
                                   const CostParams& costs) {
    return costs.eta_mean * model.v * expected_count(hawkes, costs.horizon);
}

std::vector<LossStatistics> simulate_loss_statistics(
    const HawkesParams& hawkes, const BreachModel& model, const CostParams& costs,
    const std::vector<double>& eta_vars, const StrategyFactory& strategy_for_path,
    std::size_t mc_paths, std::uint64_t seed, double h0, std::vector<LossSample>* samples) {
    if (eta_vars.empty()) {
        throw ArgumentError("simulate_loss_statistics: no loss variances requested");
    }
    constexpr std::size_t kChunk = 1024;
    const std::size_t n_chunks = (mc_paths + kChunk - 1) / kChunk;
    const std::size_t n_var = eta_vars.size();
    const double shift = std::round(expected_loss_no_investment(hawkes, model, costs));
    std::vector<SampleMoments> partial(n_chunks * n_var, SampleMoments(shift));
    if (samples != nullptr) {
        samples->assign(mc_paths, {});
    }

    std::vector<CostParams> variants(n_var, costs);
    for (std::size_t k = 0; k < n_var; ++k) {
        variants[k].eta_var = eta_vars[k];
    }

    parallel_chunks(mc_paths, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng path_rng(seed, Stream::paths, i);
            const AttackPath path = simulate_path(hawkes, costs.horizon, path_rng);
            const InvestmentStrategy strategy =
                strategy_for_path ? strategy_for_path(path) : InvestmentStrategy{ConstantRate{}};
            for (std::size_t k = 0; k < n_var; ++k) {
                const auto marks = draw_marks(path.size(), variants[k], seed, i);
                const auto sample = simulate_loss(path, marks, model, variants[k], strategy, h0);
                partial[c * n_var + k].add(sample.gross_loss);
                if (samples != nullptr && k == 0) {
                    (*samples)[i] = sample;
                }
            }
        }
    });

    std::vector<LossStatistics> out(n_var);
    for (std::size_t k = 0; k < n_var; ++k) {
        SampleMoments total(shift);
        for (std::size_t c = 0; c < n_chunks; ++c) {
            total.merge(partial[c * n_var + k]);
        }
        out[k].eta_var = eta_vars[k];
        out[k].mean = total.mean_estimate();
        out[k].variance = total.variance_estimate();
        out[k].stddev = total.stddev_estimate();
        out[k].paths = total.count();
    }
    return out;
}

Estimate loss_variance(const HawkesParams& hawkes, const BreachModel& model,
                       const CostParams& costs, const InvestmentStrategy& strategy,
                       std::size_t mc_paths, std::uint64_t seed, double h0) {
    if (mc_paths < 10'000) {
        throw ArgumentError("loss_variance: mc_paths must be at least 10^4");
    }
    const auto* constant = std::get_if<ConstantRate>(&strategy);
    if (constant != nullptr && constant->rate == 0.0 && h0 == 0.0) {
        const double v = model.v;
        const double m = costs.eta_mean;
        if (v == 0.0) {
            return {0.0, 0.0};
        }
        const double mean_count = expected_count(hawkes, costs.horizon);
        const Estimate var_count = count_variance(hawkes, costs.horizon, mc_paths, seed);
        const double k = m * m * v * v;
        return {mean_count * (costs.eta_var * v + m * m * v * (1.0 - v)) + k * var_count.value,
                k * var_count.std_error};
    }
    const auto stats = simulate_loss_statistics(
        hawkes, model, costs, {costs.eta_var},
        [&](const AttackPath&) { return strategy; }, mc_paths, seed, h0);
    return stats.front().variance;
}

void write_loss_samples_csv(std::ostream& out, const std::vector<LossSample>& samples) {
    out << "seed,gross_loss,n_attacks,n_breaches,terminal_h\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        write_csv_row(out, i, s.gross_loss, s.n_attacks, s.n_breaches, s.terminal_h);
    }
}

} // namespace cyberinv
