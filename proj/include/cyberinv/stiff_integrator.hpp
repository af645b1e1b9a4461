#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <memory>

namespace cyberinv {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Autonomous ODE system y' = f(y) with a sparse Jacobian whose pattern
/// does not change between calls.
struct OdeSystem {
    std::function<void(const Vector& y, Vector& dydt)> rhs;
    std::function<void(const Vector& y, SparseMatrix& jac)> jacobian;
};

struct IntegratorOptions {
    double rtol = 1e-6;
    double atol = 1e-8;
    double initial_step = 1e-4;
    double min_step = 1e-14;
    std::size_t max_steps = 1'000'000;
    /// Accepted steps a Jacobian may be reused for (1 = fresh every step).
    std::size_t jacobian_reuse = 10;
    /// Proposed step growth below this factor keeps the current step, so
    /// the factorisation can be reused.
    double step_hysteresis = 1.25;
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    std::size_t jacobian_evals = 0;
    std::size_t factorizations = 0;
    double min_step_taken = 0.0;
    double max_step_taken = 0.0;
};

/// Adaptive two-stage Rosenbrock method (ROS2 with gamma = 1 + 1/sqrt(2)).
/// Second order, L-stable, and a W-method: order is retained for any
/// approximation of the Jacobian, so the kink of the Hamiltonian does not
/// break it and a factorisation can be reused over several steps. Local error is estimated against the embedded first-order
/// solution y_n + h k1.
class RosenbrockIntegrator {
public:
    explicit RosenbrockIntegrator(OdeSystem system, IntegratorOptions options = {});
    ~RosenbrockIntegrator();
    RosenbrockIntegrator(RosenbrockIntegrator&&) noexcept;
    RosenbrockIntegrator& operator=(RosenbrockIntegrator&&) noexcept;

    /// Advances y from t0 to t1 (t1 > t0), landing exactly on t1. The last
    /// accepted step size is carried over to the next call.
    void integrate(Vector& y, double t0, double t1);

    const IntegratorStats& stats() const { return stats_; }
    const IntegratorOptions& options() const { return options_; }

private:
    struct Workspace;

    OdeSystem system_;
    IntegratorOptions options_;
    IntegratorStats stats_;
    double step_;
    double factored_step_ = 0.0;
    std::size_t jacobian_age_ = 0;
    bool have_jacobian_ = false;
    bool have_factor_ = false;
    std::unique_ptr<Workspace> ws_;
};

} // namespace cyberinv
