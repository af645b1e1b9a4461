#pragma once

#include <string_view>

namespace cyberinv {

enum class BreachFamily {
    class_one,  ///< S(z, v) = v / (a z + 1)^b
    class_two,  ///< S(z, v) = v^(a z + 1)
};

BreachFamily parse_breach_family(std::string_view name);
std::string_view to_string(BreachFamily family);

/// Security breach probability function S(z, v) of a Gordon-Loeb class.
/// z is an investment amount in the static model and a cybersecurity level
/// in the dynamic one.
struct BreachModel {
    BreachFamily family = BreachFamily::class_one;
    double v = 0.65;  ///< baseline vulnerability in [0, 1]
    double a = 0.1;   ///< productivity (> 0)
    double b = 1.0;   ///< exponent (> 0, class one only)

    /// Throws ArgumentError unless 0 <= v <= 1, a > 0, b > 0.
    void validate() const;

    static BreachModel standard() { return {}; }

    friend bool operator==(const BreachModel&, const BreachModel&) = default;
};

double breach_prob(const BreachModel& model, double z);
/// dS/dz.
double breach_prob_derivative(const BreachModel& model, double z);
/// d^2S/dz^2.
double breach_prob_second_derivative(const BreachModel& model, double z);

/// Expected net benefit of investment (v - S(z, v)) p loss - z.
double enbis(const BreachModel& model, double p, double loss, double z);

/// Maximiser of enbis over z >= 0. Returns exactly 0 when the marginal
/// benefit at z = 0 does not exceed the unit cost; otherwise solves
/// -S_z(z) p loss = 1 by safeguarded Newton on the bracket [0, v p loss / e].
double static_optimum(const BreachModel& model, double p, double loss);

/// Residual -S_z(z) p loss - 1 of the first-order condition.
double static_foc_residual(const BreachModel& model, double p, double loss, double z);

} // namespace cyberinv
