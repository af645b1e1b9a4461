#include "cyberinv/actuarial.hpp"

#include "cyberinv/csv.hpp"
#include "cyberinv/errors.hpp"
#include "cyberinv/strategy_eval.hpp"

#include <cmath>
#include <ostream>

namespace cyberinv {

double premium(double expected_loss, double loss_std, double theta) {
    if (!(expected_loss >= 0.0) || !(loss_std >= 0.0) || !(theta >= 0.0)) {
        throw ArgumentError("premium: expected loss, std and theta must be >= 0");
    }
    return expected_loss + theta * loss_std;
}

PremiumReport premium_report_baseline(const HawkesParams& hawkes, const BreachModel& model,
                                      const CostParams& costs, double theta,
                                      std::size_t mc_paths, std::uint64_t seed) {
    PremiumReport r;
    r.policy_label = "no_investment";
    r.eta_var = costs.eta_var;
    r.theta = theta;
    r.mc_paths = mc_paths;
    r.expected_loss = expected_loss_no_investment(hawkes, model, costs);
    const Estimate var = loss_variance(hawkes, model, costs, ConstantRate{0.0}, mc_paths, seed);
    r.loss_std = std::sqrt(std::max(var.value, 0.0));
    r.loss_std_se = r.loss_std > 0.0 ? var.std_error / (2.0 * r.loss_std) : 0.0;
    r.premium = premium(r.expected_loss, r.loss_std, theta);
    return r;
}

namespace {

void require_same_problem(const FieldMeta& meta, const HawkesParams& hawkes,
                          const BreachModel& model, const CostParams& costs) {
    const auto& p = meta.problem;
    const auto& c = p.costs;
    if (meta.one_dimensional) {
        throw ConfigError("premium: expected a Hawkes policy field, got a Poisson field");
    }
    if (!(p.hawkes == hawkes)) {
        throw ConfigError("premium: policy field was solved for different Hawkes parameters");
    }
    if (!(p.breach == model)) {
        throw ConfigError("premium: policy field was solved for a different breach model");
    }
    // eta_var and the loss family do not enter the control problem
    if (c.delta != costs.delta || c.gamma != costs.gamma || c.eta_mean != costs.eta_mean ||
        c.rho != costs.rho || c.horizon != costs.horizon || !(c.utility == costs.utility)) {
        throw ConfigError("premium: policy field was solved for different cost parameters");
    }
}

} // namespace

std::vector<PremiumReport> premium_reports_optimal(const PolicyField& policy,
                                                   const HawkesParams& hawkes,
                                                   const BreachModel& model,
                                                   const CostParams& costs, double theta,
                                                   const std::vector<double>& eta_vars,
                                                   std::size_t mc_paths, std::uint64_t seed) {
    require_same_problem(policy.meta(), hawkes, model, costs);
    if (mc_paths < 10'000) {
        throw ArgumentError("premium_report_optimal: mc_paths must be at least 10^4");
    }
    const auto stats = simulate_loss_statistics(
        hawkes, model, costs, eta_vars,
        [&policy](const AttackPath& path) {
            return extract_policy(policy, path, 0.0, 0.0).as_strategy();
        },
        mc_paths, seed, 0.0);

    std::vector<PremiumReport> out;
    out.reserve(stats.size());
    for (const auto& s : stats) {
        PremiumReport r;
        r.policy_label = "optimal";
        r.eta_var = s.eta_var;
        r.theta = theta;
        r.mc_paths = s.paths;
        r.expected_loss = s.mean.value;
        r.expected_loss_se = s.mean.std_error;
        r.loss_std = s.stddev.value;
        r.loss_std_se = s.stddev.std_error;
        r.premium = premium(r.expected_loss, r.loss_std, theta);
        out.push_back(r);
    }
    return out;
}

PremiumReport premium_report_optimal(const PolicyField& policy, const HawkesParams& hawkes,
                                     const BreachModel& model, const CostParams& costs,
                                     double theta, std::size_t mc_paths, std::uint64_t seed) {
    return premium_reports_optimal(policy, hawkes, model, costs, theta, {costs.eta_var},
                                   mc_paths, seed)
        .front();
}

PreventionGap prevention_gap(const PremiumReport& baseline, const PremiumReport& optimal) {
    if (baseline.theta != optimal.theta) {
        throw ArgumentError("prevention_gap: reports use different loadings");
    }
    if (!(baseline.premium > 0.0) || !(baseline.loss_std > 0.0)) {
        throw UndefinedGainError("prevention_gap: baseline premium or std is zero");
    }
    return {100.0 * (1.0 - optimal.premium / baseline.premium),
            100.0 * (1.0 - optimal.loss_std / baseline.loss_std)};
}

nlohmann::json to_json(const PremiumReport& r) {
    return {{"policy", r.policy_label},
            {"eta_var", r.eta_var},
            {"expected_loss", r.expected_loss},
            {"expected_loss_se", r.expected_loss_se},
            {"loss_std", r.loss_std},
            {"loss_std_se", r.loss_std_se},
            {"theta", r.theta},
            {"premium", r.premium},
            {"mc_paths", r.mc_paths}};
}

namespace {

void check_rows(const std::vector<PremiumReport>& baseline,
                const std::vector<PremiumReport>& optimal) {
    if (baseline.size() != optimal.size()) {
        throw ArgumentError("premium tables: baseline and optimal rows differ in number");
    }
}

} // namespace

void write_std_table_csv(std::ostream& out, double eta_mean,
                         const std::vector<PremiumReport>& baseline,
                         const std::vector<PremiumReport>& optimal) {
    check_rows(baseline, optimal);
    out << "eta_mean,eta_var,std_baseline,std_optimal,std_reduction_pct\n";
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        write_csv_row(out, eta_mean, baseline[i].eta_var, baseline[i].loss_std,
                      optimal[i].loss_std, prevention_gap(baseline[i], optimal[i]).std_reduction_pct);
    }
}

void write_premium_table_csv(std::ostream& out, double eta_mean,
                             const std::vector<PremiumReport>& baseline,
                             const std::vector<PremiumReport>& optimal) {
    check_rows(baseline, optimal);
    out << "eta_mean,eta_var,premium_baseline,premium_optimal,premium_reduction_pct\n";
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        write_csv_row(out, eta_mean, baseline[i].eta_var, baseline[i].premium,
                      optimal[i].premium,
                      prevention_gap(baseline[i], optimal[i]).premium_reduction_pct);
    }
}

} // namespace cyberinv
