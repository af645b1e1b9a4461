#pragma once

#include "cyberinv/gordon_loeb.hpp"
#include "cyberinv/hawkes.hpp"
#include "cyberinv/rng.hpp"
#include "cyberinv/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cyberinv {

/// Increasing concave terminal utility U(h) of the cybersecurity level.
class TerminalUtility {
public:
    enum class Kind { sqrt, zero, log1p, power };

    TerminalUtility() = default;
    static TerminalUtility sqrt() { return {}; }
    static TerminalUtility zero() { return TerminalUtility(Kind::zero, 1.0); }
    static TerminalUtility log1p() { return TerminalUtility(Kind::log1p, 1.0); }
    /// h^exponent, exponent in (0, 1].
    static TerminalUtility power(double exponent);

    /// Parses "sqrt", "zero", "log1p" or "power:<p>".
    static TerminalUtility parse(std::string_view text);
    std::string to_string() const;

    double operator()(double h) const;
    Kind kind() const { return kind_; }

    friend bool operator==(const TerminalUtility&, const TerminalUtility&) = default;

private:
    TerminalUtility(Kind kind, double exponent) : kind_(kind), exponent_(exponent) {}

    Kind kind_ = Kind::sqrt;
    double exponent_ = 0.5;
};

enum class LossFamily { lognormal, gamma, deterministic };

LossFamily parse_loss_family(std::string_view name);
std::string_view to_string(LossFamily family);

/// Economic parameters of the investment problem (money in k$, time in years).
struct CostParams {
    double delta = 1.0;       ///< linear cost coefficient
    double gamma = 0.05;      ///< quadratic cost coefficient
    double eta_mean = 10.0;   ///< mean loss per breach
    double eta_var = 10.0;    ///< variance of the loss per breach
    double rho = 0.2;         ///< obsolescence rate
    double horizon = 1.0;     ///< planning horizon T
    TerminalUtility utility;  ///< U(h), sqrt by default
    LossFamily loss_family = LossFamily::lognormal;

    /// Throws ArgumentError on domain violations, including a utility that
    /// fails a sampled monotonicity/concavity check.
    void validate() const;

    friend bool operator==(const CostParams&, const CostParams&) = default;
};

/// One loss draw with mean eta_mean and variance eta_var from the family.
double draw_loss(const CostParams& costs, CounterRng& rng);

/// State visible to a feedback rule: only information up to t-.
struct StrategyState {
    double t;
    double lambda_left;  ///< lambda_{t-}; NaN when no attack path is attached
    double level;        ///< H_t
};

struct ConstantRate {
    double rate = 0.0;
};

/// Rate rates[i] on [knots[i], knots[i+1]); the last rate also applies
/// beyond the last knot and the first one before knots[0].
struct PiecewiseConstantRate {
    std::vector<double> knots;
    std::vector<double> rates;

    double rate_at(double t) const;
};

/// General rule z = f(t, lambda_{t-}, H_t), integrated by RK4 (step <= 1e-3).
struct FeedbackRule {
    std::function<double(const StrategyState&)> rate;
};

using InvestmentStrategy = std::variant<ConstantRate, PiecewiseConstantRate, FeedbackRule>;

/// H_{t+dt} under a constant rate: h e^{-rho dt} + (z / rho)(1 - e^{-rho dt}).
double level_after(double h, double rho, double rate, double dt);

/// Advances H from t0 to t1. Exact for constant and piecewise-constant
/// rates, RK4 otherwise. path (optional) supplies lambda_{t-} to feedback
/// rules. Throws PolicyError for a negative or non-finite rate.
double advance_level(double h, double t0, double t1, double rho,
                     const InvestmentStrategy& strategy, const AttackPath* path = nullptr);

/// H at each of the increasing times, starting from h0 at times.front().
std::vector<double> evolve_level(double h0, double rho, const InvestmentStrategy& strategy,
                                 const std::vector<double>& times,
                                 const AttackPath* path = nullptr);

/// Per-attack random inputs shared by every strategy evaluated on a path
/// (common random numbers): one breach uniform and one loss draw per attack.
struct AttackMarks {
    std::vector<double> breach_uniform;
    std::vector<double> loss;
};

/// Marks for path `index` from the breach and losses sub-streams of `seed`.
AttackMarks draw_marks(std::size_t n_attacks, const CostParams& costs, std::uint64_t seed,
                       std::uint64_t index);

struct LossSample {
    double gross_loss = 0.0;
    std::size_t n_attacks = 0;
    std::size_t n_breaches = 0;
    double terminal_h = 0.0;
};

/// Marked-Hawkes loss under a strategy: at each attack time the level is
/// advanced to tau_i and the attack breaches iff uniform_i < S(H_{tau_i}, v).
LossSample simulate_loss(const AttackPath& path, const AttackMarks& marks,
                         const BreachModel& model, const CostParams& costs,
                         const InvestmentStrategy& strategy, double h0 = 0.0);

LossSample simulate_loss(const AttackPath& path, const BreachModel& model,
                         const CostParams& costs, const InvestmentStrategy& strategy,
                         std::uint64_t seed, std::uint64_t index, double h0 = 0.0);

/// E[L_T^0] = eta_mean v E[N_T].
double expected_loss_no_investment(const HawkesParams& hawkes, const BreachModel& model,
                                   const CostParams& costs);

struct LossStatistics {
    double eta_var = 0.0;
    Estimate mean;
    Estimate variance;
    Estimate stddev;
    std::size_t paths = 0;
};

/// Builds the strategy to apply on one simulated path (e.g. a policy traced
/// along that path's intensity).
using StrategyFactory = std::function<InvestmentStrategy(const AttackPath&)>;

/// Monte Carlo of L_T over mc_paths paths. The attack paths, breach uniforms
/// and the normal/gamma variates behind the loss draws are shared across all
/// entries of eta_vars, so the returned rows are coupled.
std::vector<LossStatistics> simulate_loss_statistics(
    const HawkesParams& hawkes, const BreachModel& model, const CostParams& costs,
    const std::vector<double>& eta_vars, const StrategyFactory& strategy_for_path,
    std::size_t mc_paths, std::uint64_t seed, double h0 = 0.0,
    std::vector<LossSample>* samples = nullptr);

/// Var(L_T). For the zero strategy from h0 = 0 this is
///   E[N_T](s2 v + m^2 v (1 - v)) + m^2 v^2 Var(N_T)
/// with Var(N_T) from count_variance; otherwise a pure Monte Carlo estimate.
Estimate loss_variance(const HawkesParams& hawkes, const BreachModel& model,
                       const CostParams& costs, const InvestmentStrategy& strategy,
                       std::size_t mc_paths, std::uint64_t seed, double h0 = 0.0);

/// Writes columns seed, gross_loss, n_attacks, n_breaches, terminal_h; the
/// seed column holds the path's sub-stream index under the run seed.
void write_loss_samples_csv(std::ostream& out, const std::vector<LossSample>& samples);

} // namespace cyberinv
