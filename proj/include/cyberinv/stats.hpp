#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace cyberinv {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Power sums of (x - shift) up to order four. Mergeable, so per-chunk
/// accumulators can be combined in a fixed order for reproducible results.
class SampleMoments {
public:
    explicit SampleMoments(double shift = 0.0) : shift_(shift) {}

    void add(double x) {
        const double d = x - shift_;
        const double d2 = d * d;
        ++n_;
        s1_ += d;
        s2_ += d2;
        s3_ += d2 * d;
        s4_ += d2 * d2;
    }

    /// Both accumulators must use the same shift.
    void merge(const SampleMoments& other) {
        n_ += other.n_;
        s1_ += other.s1_;
        s2_ += other.s2_;
        s3_ += other.s3_;
        s4_ += other.s4_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return n_ == 0 ? 0.0 : shift_ + s1_ / nd(); }

    /// Unbiased sample variance.
    double variance() const {
        if (n_ < 2) {
            return 0.0;
        }
        const double m = s1_ / nd();
        return std::max(0.0, (s2_ - nd() * m * m) / (nd() - 1.0));
    }

    double stddev() const { return std::sqrt(variance()); }

    Estimate mean_estimate() const {
        return {mean(), n_ < 2 ? 0.0 : std::sqrt(variance() / nd())};
    }

    /// Standard error of the sample variance: sqrt((mu4 - sigma^4) / n).
    Estimate variance_estimate() const {
        const double var = variance();
        if (n_ < 2) {
            return {var, 0.0};
        }
        return {var, std::sqrt(std::max(0.0, central4() - var * var) / nd())};
    }

    /// Delta method on the variance estimate.
    Estimate stddev_estimate() const {
        const auto v = variance_estimate();
        const double sd = std::sqrt(v.value);
        return {sd, sd > 0.0 ? v.std_error / (2.0 * sd) : 0.0};
    }

private:
    double nd() const { return static_cast<double>(n_); }

    double central4() const {
        const double n = nd();
        const double m = s1_ / n;
        const double e2 = s2_ / n;
        const double e3 = s3_ / n;
        const double e4 = s4_ / n;
        return e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m * m * m * m;
    }

    double shift_;
    std::size_t n_ = 0;
    double s1_ = 0.0, s2_ = 0.0, s3_ = 0.0, s4_ = 0.0;
};

} // namespace cyberinv
