#include "cyberinv/gordon_loeb.hpp"

#include "cyberinv/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cyberinv {

namespace {

void require_level(double z) {
    if (!std::isfinite(z) || z < 0.0) {
        throw ArgumentError("breach probability: z must be finite and >= 0");
    }
}

} // namespace

BreachFamily parse_breach_family(std::string_view name) {
    if (name == "class1" || name == "I" || name == "class_one") {
        return BreachFamily::class_one;
    }
    if (name == "class2" || name == "II" || name == "class_two") {
        return BreachFamily::class_two;
    }
    throw ArgumentError("unknown breach family '" + std::string(name) +
                        "' (expected class1 or class2)");
}

std::string_view to_string(BreachFamily family) {
    return family == BreachFamily::class_one ? "class1" : "class2";
}

void BreachModel::validate() const {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ArgumentError("BreachModel: v must lie in [0, 1]");
    }
    if (!std::isfinite(a) || !(a > 0.0)) {
        throw ArgumentError("BreachModel: a must be finite and > 0");
    }
    if (!std::isfinite(b) || !(b > 0.0)) {
        throw ArgumentError("BreachModel: b must be finite and > 0");
    }
}

double breach_prob(const BreachModel& m, double z) {
    require_level(z);
    if (m.v == 0.0) {
        return 0.0;
    }
    if (m.family == BreachFamily::class_one) {
        return m.v / std::pow(m.a * z + 1.0, m.b);
    }
    return std::pow(m.v, m.a * z + 1.0);
}

double breach_prob_derivative(const BreachModel& m, double z) {
    require_level(z);
    if (m.v == 0.0) {
        return 0.0;
    }
    if (m.family == BreachFamily::class_one) {
        return -m.v * m.a * m.b / std::pow(m.a * z + 1.0, m.b + 1.0);
    }
    return m.a * std::log(m.v) * std::pow(m.v, m.a * z + 1.0);
}

double breach_prob_second_derivative(const BreachModel& m, double z) {
    require_level(z);
    if (m.v == 0.0) {
        return 0.0;
    }
    if (m.family == BreachFamily::class_one) {
        return m.v * m.a * m.a * m.b * (m.b + 1.0) / std::pow(m.a * z + 1.0, m.b + 2.0);
    }
    const double lv = std::log(m.v);
    return m.a * m.a * lv * lv * std::pow(m.v, m.a * z + 1.0);
}

double enbis(const BreachModel& m, double p, double loss, double z) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ArgumentError("enbis: p must lie in [0, 1]");
    }
    if (!std::isfinite(loss) || loss < 0.0) {
        throw ArgumentError("enbis: loss must be finite and >= 0");
    }
    return (m.v - breach_prob(m, z)) * p * loss - z;
}

double static_foc_residual(const BreachModel& m, double p, double loss, double z) {
    return -breach_prob_derivative(m, z) * p * loss - 1.0;
}

double static_optimum(const BreachModel& m, double p, double loss) {
    m.validate();
    enbis(m, p, loss, 0.0);  // domain checks
    if (static_foc_residual(m, p, loss, 0.0) <= 0.0) {
        return 0.0;
    }
    if (m.family == BreachFamily::class_one && m.b == 1.0) {
        return std::max(0.0, (std::sqrt(m.v * m.a * p * loss) - 1.0) / m.a);
    }

    // g(z) = -S_z p loss - 1 is strictly decreasing (S convex); g(0) > 0 and
    // the root lies below v p loss / e.
    double lo = 0.0;
    double hi = m.v * p * loss / std::numbers::e;
    if (static_foc_residual(m, p, loss, hi) > 0.0) {
        throw NumericalError("static_optimum: first-order condition not bracketed");
    }
    double z = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double g = static_foc_residual(m, p, loss, z);
        if (g > 0.0) {
            lo = z;
        } else {
            hi = z;
        }
        const double dg = -breach_prob_second_derivative(m, z) * p * loss;
        double next = dg != 0.0 ? z - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - z) <= 1e-10 * std::max(1.0, z) || hi - lo <= 1e-14 * hi) {
            return next;
        }
        z = next;
    }
    return z;
}

} // namespace cyberinv
