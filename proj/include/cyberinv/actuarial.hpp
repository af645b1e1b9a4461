#pragma once

#include "cyberinv/hjb_pide.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cyberinv {

/// Premium under the standard-deviation principle, premium = E + theta sigma.
struct PremiumReport {
    std::string policy_label;
    double eta_var = 0.0;
    double expected_loss = 0.0;
    double loss_std = 0.0;
    double theta = 0.0;
    double premium = 0.0;
    std::size_t mc_paths = 0;
    double expected_loss_se = 0.0;  ///< 0 when the mean is exact
    double loss_std_se = 0.0;
};

/// expected_loss + theta loss_std. Throws ArgumentError on negative inputs.
double premium(double expected_loss, double loss_std, double theta);

/// No-investment policy: closed-form mean and the compound-loss variance
/// formula with Var(N_T) estimated from mc_paths Hawkes paths.
PremiumReport premium_report_baseline(const HawkesParams& hawkes, const BreachModel& model,
                                      const CostParams& costs, double theta,
                                      std::size_t mc_paths, std::uint64_t seed);

/// Optimal feedback policy read from `policy` along each simulated path
/// (starting from h = 0), one report per entry of eta_vars. All rows share
/// attack paths and breach draws. Throws ConfigError when the field was
/// solved for different Hawkes, breach or cost parameters.
std::vector<PremiumReport> premium_reports_optimal(const PolicyField& policy,
                                                   const HawkesParams& hawkes,
                                                   const BreachModel& model,
                                                   const CostParams& costs, double theta,
                                                   const std::vector<double>& eta_vars,
                                                   std::size_t mc_paths, std::uint64_t seed);

PremiumReport premium_report_optimal(const PolicyField& policy, const HawkesParams& hawkes,
                                     const BreachModel& model, const CostParams& costs,
                                     double theta, std::size_t mc_paths, std::uint64_t seed);

struct PreventionGap {
    double premium_reduction_pct = 0.0;
    double std_reduction_pct = 0.0;
};

/// 100 (1 - optimal / baseline) for the premium and for the loss std.
PreventionGap prevention_gap(const PremiumReport& baseline, const PremiumReport& optimal);

nlohmann::json to_json(const PremiumReport& report);

/// Rows of eta_mean, eta_var, std_baseline, std_optimal, std_reduction_pct.
void write_std_table_csv(std::ostream& out, double eta_mean,
                         const std::vector<PremiumReport>& baseline,
                         const std::vector<PremiumReport>& optimal);
/// Rows of eta_mean, eta_var, premium_baseline, premium_optimal, premium_reduction_pct.
void write_premium_table_csv(std::ostream& out, double eta_mean,
                             const std::vector<PremiumReport>& baseline,
                             const std::vector<PremiumReport>& optimal);

} // namespace cyberinv
