#include "cyberinv/hjb_pide.hpp"

#include "cyberinv/errors.hpp"
#include "cyberinv/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace cyberinv {

namespace {

std::size_t checked_count(double span, double step, const char* axis) {
    const double ratio = span / step;
    const double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "SolverGrid: " << axis << "_max - " << axis << "_min = " << span
            << " is not a multiple of d_" << axis << " = " << step;
        throw ArgumentError(msg.str());
    }
    return static_cast<std::size_t>(r) + 1;
}

constexpr std::size_t kRowsPerChunk = 8;

} // namespace

SolverGrid SolverGrid::refined(double factor) const {
    if (!(factor > 0.0)) {
        throw ArgumentError("SolverGrid::refined: factor must be > 0");
    }
    SolverGrid g = *this;
    g.d_lambda /= factor;
    g.d_h /= factor;
    g.validate();
    return g;
}

void SolverGrid::validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(lambda_min) || !finite(lambda_max) || !finite(h_min) || !finite(h_max)) {
        throw ArgumentError("SolverGrid: bounds must be finite");
    }
    if (!(d_lambda > 0.0) || !(d_h > 0.0) || !finite(d_lambda) || !finite(d_h)) {
        throw ArgumentError("SolverGrid: d_lambda and d_h must be > 0");
    }
    if (lambda_min < 0.0 || lambda_max < lambda_min) {
        throw ArgumentError("SolverGrid: need 0 <= lambda_min <= lambda_max");
    }
    if (h_min < 0.0 || !(h_max > h_min)) {
        throw ArgumentError("SolverGrid: need 0 <= h_min < h_max");
    }
    if (snapshot_intervals < 1) {
        throw ArgumentError("SolverGrid: snapshot_intervals must be >= 1");
    }
    n_lambda();
    n_h();
}

std::size_t SolverGrid::n_lambda() const {
    return checked_count(lambda_max - lambda_min, d_lambda, "lambda");
}

std::size_t SolverGrid::n_h() const { return checked_count(h_max - h_min, d_h, "h"); }

JumpShift parse_jump_shift(std::string_view name) {
    if (name == "floor") {
        return JumpShift::floor;
    }
    if (name == "interpolate") {
        return JumpShift::interpolate;
    }
    throw ArgumentError("unknown jump shift mode '" + std::string(name) +
                        "' (expected floor or interpolate)");
}

std::string_view to_string(JumpShift mode) {
    return mode == JumpShift::floor ? "floor" : "interpolate";
}

QueryMode parse_query_mode(std::string_view name) {
    if (name == "nearest") {
        return QueryMode::nearest;
    }
    if (name == "linear") {
        return QueryMode::linear;
    }
    throw ArgumentError("unknown query mode '" + std::string(name) +
                        "' (expected nearest or linear)");
}

std::string_view to_string(QueryMode mode) {
    return mode == QueryMode::nearest ? "nearest" : "linear";
}

HjbOperator::HjbOperator(SolverGrid grid, Problem problem, SolverOptions options)
    : grid_(grid), problem_(std::move(problem)), options_(options) {
    grid_.validate();
    problem_.validate();
    nl_ = grid_.n_lambda();
    nh_ = grid_.n_h();

    const double beta = problem_.hawkes.beta();
    if (options_.jump_shift == JumpShift::floor) {
        shift_lo_ = static_cast<std::size_t>(std::floor(std::floor(beta) / grid_.d_lambda + 1e-9));
        shift_ = static_cast<double>(shift_lo_);
        shift_weight_ = 0.0;
        shift_exact_ = std::abs(beta / grid_.d_lambda - static_cast<double>(shift_lo_)) < 1e-9;
    } else {
        shift_ = beta / grid_.d_lambda;
        shift_lo_ = static_cast<std::size_t>(std::floor(shift_ + 1e-9));
        shift_weight_ = std::max(0.0, shift_ - static_cast<double>(shift_lo_));
        if (shift_weight_ < 1e-9) {
            shift_weight_ = 0.0;
        }
        shift_exact_ = true;
    }

    reward_.resize(nh_);
    const auto& costs = problem_.costs;
    for (std::size_t m = 0; m < nh_; ++m) {
        reward_[m] =
            costs.eta_mean * (problem_.breach.v - breach_prob(problem_.breach, grid_.h_at(m)));
    }
}

HjbOperator::Stencil HjbOperator::lambda_stencil(std::size_t n, bool upwind_forward) const {
    if (nl_ == 1) {
        return {0, 0, 0.0};
    }
    const std::size_t last = nl_ - 1;
    const double inv = 1.0 / grid_.d_lambda;
    if (!options_.upwind) {
        if (n == 0) {
            return {0, 1, inv};
        }
        if (n == last) {
            return {last - 1, last, inv};
        }
        return {n - 1, n + 1, 0.5 * inv};
    }
    if (upwind_forward) {
        return n < last ? Stencil{n, n + 1, inv} : Stencil{last - 1, last, inv};
    }
    return n > 0 ? Stencil{n - 1, n, inv} : Stencil{0, 1, inv};
}

HjbOperator::Stencil HjbOperator::h_stencil(std::size_t m, int direction) const {
    if (nh_ == 1) {
        return {0, 0, 0.0};
    }
    const std::size_t last = nh_ - 1;
    const double inv = 1.0 / grid_.d_h;
    if (direction > 0) {
        return m < last ? Stencil{m, m + 1, inv} : Stencil{last - 1, last, inv};
    }
    if (direction < 0) {
        return m > 0 ? Stencil{m - 1, m, inv} : Stencil{0, 1, inv};
    }
    if (m == 0) {
        return {0, 1, inv};
    }
    if (m == last) {
        return {last - 1, last, inv};
    }
    return {m - 1, m + 1, 0.5 * inv};
}

HjbOperator::Stencil HjbOperator::drift_lambda_stencil(std::size_t n) const {
    const auto& hp = problem_.hawkes;
    return lambda_stencil(n, hp.xi() * (hp.alpha() - grid_.lambda_at(n)) > 0.0);
}

HjbOperator::Stencil HjbOperator::drift_h_stencil(std::size_t m) const {
    // the obsolescence drift -rho h points down in h
    return h_stencil(m, options_.upwind ? -1 : 0);
}

HjbOperator::Stencil HjbOperator::hamiltonian_h_stencil(std::size_t m) const {
    // investment pushes h up
    return h_stencil(m, options_.upwind ? 1 : 0);
}

double HjbOperator::policy_gradient(const Vector& state, std::size_t n, std::size_t m) const {
    const auto s = hamiltonian_h_stencil(m);
    const std::size_t row = n * nh_;
    return (state[static_cast<Eigen::Index>(row + s.hi)] -
            state[static_cast<Eigen::Index>(row + s.lo)]) *
           s.scale;
}

double HjbOperator::policy(const Vector& state, std::size_t n, std::size_t m) const {
    const auto& c = problem_.costs;
    return std::max(policy_gradient(state, n, m) - c.delta, 0.0) / c.gamma;
}

NodeTerms HjbOperator::node_terms(const Vector& state, std::size_t n, std::size_t m) const {
    const auto& hp = problem_.hawkes;
    const auto& c = problem_.costs;
    const double lambda = grid_.lambda_at(n);
    const double h = grid_.h_at(m);
    auto value = [&](std::size_t nn, std::size_t mm) {
        return state[static_cast<Eigen::Index>(nn * nh_ + mm)];
    };

    NodeTerms out;
    const auto sl = drift_lambda_stencil(n);
    out.drift_lambda =
        hp.xi() * (hp.alpha() - lambda) * (value(sl.hi, m) - value(sl.lo, m)) * sl.scale;
    const auto sh = drift_h_stencil(m);
    out.drift_h = -c.rho * h * (value(n, sh.hi) - value(n, sh.lo)) * sh.scale;

    const std::size_t last = nl_ - 1;
    const std::size_t j0 = std::min(n + shift_lo_, last);
    double shifted = value(j0, m);
    if (shift_weight_ > 0.0) {
        const std::size_t j1 = std::min(n + shift_lo_ + 1, last);
        shifted = (1.0 - shift_weight_) * shifted + shift_weight_ * value(j1, m);
    }
    out.jump = lambda * (shifted - value(n, m));
    out.reward = reward_[m] * lambda;

    const double excess = std::max(policy_gradient(state, n, m) - c.delta, 0.0);
    out.hamiltonian = excess * excess / (2.0 * c.gamma);
    return out;
}

void HjbOperator::time_derivative(const Vector& state, Vector& dvdt) const {
    const auto total = static_cast<Eigen::Index>(nl_ * nh_);
    if (state.size() != total) {
        throw ArgumentError("HjbOperator: state size does not match the grid");
    }
    if (!state.allFinite()) {
        throw NumericalError("HjbOperator: non-finite value in the state vector");
    }
    dvdt.resize(total);
    parallel_chunks(nl_, kRowsPerChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            for (std::size_t m = 0; m < nh_; ++m) {
                dvdt[static_cast<Eigen::Index>(n * nh_ + m)] = -node_terms(state, n, m).total();
            }
        }
    });
}

void HjbOperator::backward_jacobian(const Vector& state, SparseMatrix& jac) const {
    const auto& hp = problem_.hawkes;
    const auto& c = problem_.costs;
    const auto total = static_cast<Eigen::Index>(nl_ * nh_);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(total) * 10);
    const std::size_t last = nl_ - 1;

    for (std::size_t n = 0; n < nl_; ++n) {
        const double lambda = grid_.lambda_at(n);
        const double b = hp.xi() * (hp.alpha() - lambda);
        const auto sl = drift_lambda_stencil(n);
        for (std::size_t m = 0; m < nh_; ++m) {
            const auto row = static_cast<int>(n * nh_ + m);
            auto add = [&](std::size_t nn, std::size_t mm, double v) {
                entries.emplace_back(row, static_cast<int>(nn * nh_ + mm), v);
            };
            add(sl.hi, m, b * sl.scale);
            add(sl.lo, m, -b * sl.scale);

            const double h = grid_.h_at(m);
            const auto sh = drift_h_stencil(m);
            add(n, sh.hi, -c.rho * h * sh.scale);
            add(n, sh.lo, c.rho * h * sh.scale);

            add(n, m, -lambda);
            add(std::min(n + shift_lo_, last), m, lambda * (1.0 - shift_weight_));
            if (shift_weight_ > 0.0) {
                add(std::min(n + shift_lo_ + 1, last), m, lambda * shift_weight_);
            }

            const auto sp = hamiltonian_h_stencil(m);
            const double slope = std::max(policy_gradient(state, n, m) - c.delta, 0.0) / c.gamma;
            add(n, sp.hi, slope * sp.scale);
            add(n, sp.lo, -slope * sp.scale);
        }
    }
    jac.resize(total, total);
    jac.setFromTriplets(entries.begin(), entries.end());
}

Vector assemble_rhs(const Vector& state, const SolverGrid& grid, const HawkesParams& hawkes,
                    const BreachModel& model, const CostParams& costs) {
    const HjbOperator op(grid, Problem{hawkes, model, costs});
    Vector out;
    op.time_derivative(state, out);
    return out;
}

double FieldMeta::time_at(std::size_t k) const {
    if (k >= grid.snapshot_intervals) {
        return horizon();
    }
    return static_cast<double>(k) * d_t();
}

std::size_t FieldMeta::nearest_snapshot(double t) const {
    const double pos = std::clamp(t / d_t(), 0.0, static_cast<double>(grid.snapshot_intervals));
    return static_cast<std::size_t>(std::llround(pos));
}

GridSurface::GridSurface(FieldMeta meta, std::vector<double> data)
    : meta_(std::move(meta)), data_(std::move(data)) {
    if (!data_.empty() && data_.size() != meta_.snapshots() * meta_.grid.nodes()) {
        throw ArgumentError("GridSurface: data size does not match grid and snapshot count");
    }
}

double GridSurface::at(std::size_t k, std::size_t n, std::size_t m) const {
    const std::size_t nh = meta_.grid.n_h();
    const std::size_t nl = meta_.grid.n_lambda();
    if (k >= meta_.snapshots() || n >= nl || m >= nh) {
        throw ArgumentError("GridSurface::at: index out of range");
    }
    return data_[(k * nl + n) * nh + m];
}

std::span<const double> GridSurface::snapshot(std::size_t k) const {
    const std::size_t nodes = meta_.grid.nodes();
    if (k >= meta_.snapshots() || data_.empty()) {
        throw ArgumentError("GridSurface::snapshot: index out of range");
    }
    return {data_.data() + k * nodes, nodes};
}

double GridSurface::query(double t, double lambda, double h, QueryMode mode,
                          QueryDiagnostics* diag) const {
    if (data_.empty()) {
        throw ArgumentError("GridSurface::query: field holds no data");
    }
    const double horizon = meta_.horizon();
    if (!(t >= -1e-12 * horizon && t <= horizon * (1.0 + 1e-12))) {
        throw ArgumentError("GridSurface::query: t outside [0, T]");
    }
    const auto& g = meta_.grid;
    const std::size_t nl = g.n_lambda();
    const std::size_t nh = g.n_h();
    if (h < g.h_min || h > g.h_max) {
        if (diag != nullptr) {
            ++diag->h_clamped;
        }
    }
    const double hc = std::clamp(h, g.h_min, g.h_max);
    const double lc = meta_.one_dimensional ? g.lambda_min : std::clamp(lambda, g.lambda_min, g.lambda_max);

    const double kt = std::clamp(t / meta_.d_t(), 0.0, static_cast<double>(g.snapshot_intervals));
    const double xl = nl > 1 ? (lc - g.lambda_min) / g.d_lambda : 0.0;
    const double xh = (hc - g.h_min) / g.d_h;

    if (mode == QueryMode::nearest) {
        const auto k = static_cast<std::size_t>(std::llround(kt));
        const auto n = std::min(static_cast<std::size_t>(std::llround(xl)), nl - 1);
        const auto m = std::min(static_cast<std::size_t>(std::llround(xh)), nh - 1);
        return data_[(k * nl + n) * nh + m];
    }

    auto split = [](double x, std::size_t count, std::size_t& i0, double& w) {
        if (count == 1) {
            i0 = 0;
            w = 0.0;
            return;
        }
        i0 = std::min(static_cast<std::size_t>(std::floor(x)), count - 2);
        w = std::clamp(x - static_cast<double>(i0), 0.0, 1.0);
    };
    std::size_t k0 = 0;
    std::size_t n0 = 0;
    std::size_t m0 = 0;
    double wk = 0.0;
    double wl = 0.0;
    double wh = 0.0;
    split(kt, meta_.snapshots(), k0, wk);
    split(xl, nl, n0, wl);
    split(xh, nh, m0, wh);

    double acc = 0.0;
    for (int dk = 0; dk < 2; ++dk) {
        const double ck = dk == 0 ? 1.0 - wk : wk;
        if (ck == 0.0) {
            continue;
        }
        for (int dn = 0; dn < 2; ++dn) {
            const double cn = dn == 0 ? 1.0 - wl : wl;
            if (cn == 0.0) {
                continue;
            }
            for (int dm = 0; dm < 2; ++dm) {
                const double cm = dm == 0 ? 1.0 - wh : wh;
                if (cm == 0.0) {
                    continue;
                }
                acc += ck * cn * cm * data_[((k0 + dk) * nl + n0 + dn) * nh + m0 + dm];
            }
        }
    }
    return acc;
}

double QualityReport::violation_fraction() const {
    return monotonicity_checked == 0
               ? 0.0
               : static_cast<double>(monotonicity_violations) /
                     static_cast<double>(monotonicity_checked);
}

double hjb_residual(const ValueField& field, std::size_t k, bool boundary) {
    const auto& meta = field.meta();
    if (meta.snapshots() < 3) {
        throw ArgumentError("hjb_residual: needs at least 3 snapshots");
    }
    if (k == 0 || k + 1 >= meta.snapshots()) {
        throw ArgumentError("hjb_residual: snapshot must be interior");
    }
    const HjbOperator op(meta.grid, meta.problem, meta.options);
    const std::size_t nodes = meta.grid.nodes();
    const auto now = field.snapshot(k);
    const auto before = field.snapshot(k - 1);
    const auto after = field.snapshot(k + 1);
    const Vector state = Eigen::Map<const Vector>(now.data(), static_cast<Eigen::Index>(nodes));
    const double dt2 = meta.time_at(k + 1) - meta.time_at(k - 1);

    const std::size_t nl = meta.grid.n_lambda();
    const std::size_t nh = meta.grid.n_h();
    double worst = 0.0;
    for (std::size_t n = 0; n < nl; ++n) {
        const bool edge_l = nl > 1 && (n == 0 || n + 1 == nl);
        for (std::size_t m = 0; m < nh; ++m) {
            const bool edge = edge_l || m == 0 || m + 1 == nh;
            if (edge != boundary) {
                continue;
            }
            const std::size_t i = n * nh + m;
            const double vt = (after[i] - before[i]) / dt2;
            worst = std::max(worst, std::abs(vt + op.node_terms(state, n, m).total()));
        }
    }
    return worst;
}

std::size_t count_monotonicity_violations(const ValueField& field, double tol,
                                          std::size_t* checked) {
    const auto& g = field.meta().grid;
    const std::size_t nl = g.n_lambda();
    const std::size_t nh = g.n_h();
    std::size_t bad = 0;
    std::size_t seen = 0;
    for (std::size_t k = 0; k < field.meta().snapshots(); ++k) {
        const auto v = field.snapshot(k);
        double scale = 0.0;
        for (double x : v) {
            scale = std::max(scale, std::abs(x));
        }
        const double slack = tol * std::max(scale, 1.0);
        for (std::size_t n = 0; n < nl; ++n) {
            for (std::size_t m = 0; m < nh; ++m) {
                const double x = v[n * nh + m];
                const bool down_l = n > 0 && x < v[(n - 1) * nh + m] - slack;
                const bool down_h = m > 0 && x < v[n * nh + m - 1] - slack;
                bad += (down_l || down_h) ? 1 : 0;
                ++seen;
            }
        }
    }
    if (checked != nullptr) {
        *checked = seen;
    }
    return bad;
}

SolveResult solve(const SolverGrid& grid, const Problem& problem, const SolverOptions& options,
                  const SnapshotSink& sink) {
    const auto started = std::chrono::steady_clock::now();
    const HjbOperator op(grid, problem, options);

    FieldMeta meta{grid, problem, options};
    const std::size_t nl = grid.n_lambda();
    const std::size_t nh = grid.n_h();
    const std::size_t nodes = nl * nh;
    const std::size_t count = meta.snapshots();
    const bool stream = sink && nodes * count > options.stream_threshold;

    QualityReport quality;
    quality.streamed = stream;
    if (!op.jump_shift_exact()) {
        std::ostringstream msg;
        msg << "beta = " << problem.hawkes.beta() << " is not a multiple of d_lambda = "
            << grid.d_lambda << "; jump shift rounded down to " << std::floor(op.jump_shift())
            << " nodes";
        quality.warnings.push_back(msg.str());
    }

    std::vector<double> values;
    std::vector<double> controls;
    if (!stream) {
        values.resize(nodes * count);
        controls.resize(nodes * count);
    }
    std::vector<double> v_snap(nodes);
    std::vector<double> z_snap(nodes);

    Vector y(static_cast<Eigen::Index>(nodes));
    for (std::size_t n = 0; n < nl; ++n) {
        for (std::size_t m = 0; m < nh; ++m) {
            y[static_cast<Eigen::Index>(n * nh + m)] = problem.costs.utility(grid.h_at(m));
        }
    }

    auto record = [&](std::size_t k) {
        for (std::size_t n = 0; n < nl; ++n) {
            for (std::size_t m = 0; m < nh; ++m) {
                const std::size_t i = n * nh + m;
                v_snap[i] = y[static_cast<Eigen::Index>(i)];
                z_snap[i] = op.policy(y, n, m);
            }
        }
        if (!stream) {
            std::copy(v_snap.begin(), v_snap.end(), values.begin() + static_cast<std::ptrdiff_t>(k * nodes));
            std::copy(z_snap.begin(), z_snap.end(), controls.begin() + static_cast<std::ptrdiff_t>(k * nodes));
        }
        if (sink) {
            sink(k, v_snap, z_snap);
        }
    };

    const std::size_t last = count - 1;
    record(last);

    OdeSystem system{
        [&op](const Vector& state, Vector& out) {
            op.time_derivative(state, out);
            out = -out;
        },
        [&op](const Vector& state, SparseMatrix& jac) { op.backward_jacobian(state, jac); }};
    IntegratorOptions iopt;
    iopt.rtol = options.rtol;
    iopt.atol = options.atol;
    RosenbrockIntegrator integrator(std::move(system), iopt);

    const double horizon = problem.costs.horizon;
    for (std::size_t j = 1; j <= last; ++j) {
        const double tau0 = horizon - meta.time_at(last - j + 1);
        const double tau1 = horizon - meta.time_at(last - j);
        try {
            integrator.integrate(y, tau0, tau1);
        } catch (const SolverError& e) {
            const auto& s = integrator.stats();
            std::ostringstream msg;
            msg << e.what() << " [t = " << horizon - tau0 << ", steps " << s.steps
                << ", rejected " << s.rejected << ", smallest step " << s.min_step_taken << "]";
            throw SolverError(msg.str());
        }
        record(last - j);
    }

    quality.integrator = integrator.stats();
    ValueField value(meta, std::move(values));
    PolicyField policy(meta, std::move(controls));

    if (!stream) {
        double terminal = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            terminal = std::max(terminal, std::abs(value.snapshot(last)[i] -
                                                   problem.costs.utility(grid.h_at(i % nh))));
        }
        quality.terminal_error = terminal;
        quality.monotonicity_violations =
            count_monotonicity_violations(value, 1e-6, &quality.monotonicity_checked);
        if (count >= 3) {
            for (double frac : {0.25, 0.5, 0.75}) {
                const std::size_t k =
                    std::clamp<std::size_t>(meta.nearest_snapshot(frac * horizon), 1, last - 1);
                quality.residuals.push_back(
                    {meta.time_at(k), hjb_residual(value, k, false), hjb_residual(value, k, true)});
            }
        }
    } else {
        quality.warnings.push_back(
            "snapshots streamed to the sink; monotonicity and residual checks skipped");
    }
    quality.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(value), std::move(policy), std::move(quality)};
}

} // namespace cyberinv
