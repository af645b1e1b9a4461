#pragma once

#include "cyberinv/cyber_dynamics.hpp"
#include "cyberinv/gordon_loeb.hpp"
#include "cyberinv/hawkes.hpp"

namespace cyberinv {

/// Everything that defines the control problem, independent of discretisation.
struct Problem {
    HawkesParams hawkes = HawkesParams::standard();
    BreachModel breach = BreachModel::standard();
    CostParams costs;

    static Problem standard() { return {}; }

    void validate() const {
        breach.validate();
        costs.validate();
    }

    friend bool operator==(const Problem&, const Problem&) = default;
};

} // namespace cyberinv
