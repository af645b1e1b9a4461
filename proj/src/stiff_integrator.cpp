#include "cyberinv/stiff_integrator.hpp"

#include "cyberinv/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cyberinv {

namespace {

constexpr double kGamma = 1.0 + 0.70710678118654752440;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double rtol,
                  double atol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

} // namespace

struct RosenbrockIntegrator::Workspace {
    SparseMatrix jac;
    SparseMatrix identity;
    SparseMatrix newton;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool pattern_analyzed = false;
    Vector f0, f1, k1, k2, stage, y_new, err;
};

RosenbrockIntegrator::RosenbrockIntegrator(OdeSystem system, IntegratorOptions options)
    : system_(std::move(system)),
      options_(options),
      step_(options.initial_step),
      ws_(std::make_unique<Workspace>()) {
    if (!system_.rhs || !system_.jacobian) {
        throw ArgumentError("RosenbrockIntegrator: rhs and jacobian callbacks are required");
    }
    if (!(options_.rtol > 0.0) || !(options_.atol > 0.0)) {
        throw ArgumentError("RosenbrockIntegrator: tolerances must be positive");
    }
}

RosenbrockIntegrator::~RosenbrockIntegrator() = default;
RosenbrockIntegrator::RosenbrockIntegrator(RosenbrockIntegrator&&) noexcept = default;
RosenbrockIntegrator& RosenbrockIntegrator::operator=(RosenbrockIntegrator&&) noexcept = default;

void RosenbrockIntegrator::integrate(Vector& y, double t0, double t1) {
    if (!(t1 > t0)) {
        throw ArgumentError("RosenbrockIntegrator::integrate: t1 must exceed t0");
    }
    auto& w = *ws_;
    const Eigen::Index n = y.size();
    if (w.identity.rows() != n) {
        w.identity.resize(n, n);
        w.identity.setIdentity();
        w.pattern_analyzed = false;
    }

    double t = t0;
    while (t < t1) {
        if (stats_.steps + stats_.rejected >= options_.max_steps) {
            std::ostringstream msg;
            msg << "Rosenbrock integrator: exceeded " << options_.max_steps << " steps at t=" << t;
            throw SolverError(msg.str());
        }

        const double remaining = t1 - t;
        bool last = false;
        // split the rest of the interval into equal steps so that a held
        // step size keeps its factorisation up to the endpoint
        const double pieces = std::ceil(remaining / step_ * (1.0 - 1e-12));
        double h = remaining / std::max(pieces, 1.0);
        if (pieces <= 1.0) {
            h = remaining;
            last = true;
        }

        system_.rhs(y, w.f0);
        ++stats_.rhs_evals;
        if (!w.f0.allFinite()) {
            throw NumericalError("Rosenbrock integrator: non-finite right-hand side");
        }
        if (!have_jacobian_ || jacobian_age_ >= options_.jacobian_reuse) {
            system_.jacobian(y, w.jac);
            ++stats_.jacobian_evals;
            have_jacobian_ = true;
            have_factor_ = false;
            jacobian_age_ = 0;
        }

        bool accepted = false;
        while (!accepted) {
            if (h < options_.min_step) {
                std::ostringstream msg;
                msg << "Rosenbrock integrator: step size underflow (h=" << h << ") at t=" << t
                    << " after " << stats_.steps << " steps, " << stats_.rejected
                    << " rejections";
                throw SolverError(msg.str());
            }
            // a slightly different h only perturbs the W matrix, which the
            // method tolerates
            if (!have_factor_ || std::abs(h / factored_step_ - 1.0) > 1e-3) {
                w.newton = w.identity - (kGamma * h) * w.jac;
                w.newton.makeCompressed();
                if (!w.pattern_analyzed) {
                    w.lu.analyzePattern(w.newton);
                    w.pattern_analyzed = true;
                }
                w.lu.factorize(w.newton);
                ++stats_.factorizations;
                if (w.lu.info() != Eigen::Success) {
                    have_factor_ = false;
                    h *= 0.25;
                    last = false;
                    ++stats_.rejected;
                    continue;
                }
                have_factor_ = true;
                factored_step_ = h;
            }

            w.k1 = w.lu.solve(w.f0);
            w.stage = y + h * w.k1;
            system_.rhs(w.stage, w.f1);
            ++stats_.rhs_evals;
            w.k2 = w.lu.solve(w.f1 - 2.0 * w.k1);
            w.y_new = y + (1.5 * h) * w.k1 + (0.5 * h) * w.k2;
            w.err = (0.5 * h) * (w.k1 + w.k2);

            double err = error_norm(w.err, y, w.y_new, options_.rtol, options_.atol);
            if (!std::isfinite(err) || !w.y_new.allFinite()) {
                err = 1e10;
            }
            const double factor =
                std::clamp(0.9 / std::sqrt(std::max(err, 1e-10)), 0.2, 5.0);
            if (err <= 1.0) {
                accepted = true;
                y = w.y_new;
                t = last ? t1 : t + h;
                ++stats_.steps;
                ++jacobian_age_;
                stats_.min_step_taken =
                    stats_.steps == 1 ? h : std::min(stats_.min_step_taken, h);
                stats_.max_step_taken = std::max(stats_.max_step_taken, h);
                // a short final step says nothing about the achievable step size
                if (!last || factor < 1.0) {
                    step_ = factor >= 1.0 && factor < options_.step_hysteresis ? h : h * factor;
                }
            } else {
                ++stats_.rejected;
                h *= std::min(factor, 0.5);
                last = false;
                if (jacobian_age_ > 0) {
                    // a stale Jacobian may be the cause; refresh before retrying
                    system_.jacobian(y, w.jac);
                    ++stats_.jacobian_evals;
                    have_factor_ = false;
                    jacobian_age_ = 0;
                }
            }
        }
    }
}

} // namespace cyberinv
