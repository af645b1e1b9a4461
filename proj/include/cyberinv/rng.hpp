#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace cyberinv {

/// Named sub-streams. Every random draw in the toolkit is addressed by
/// (top-level seed, stream, index) so results do not depend on thread count
/// or on the order in which batches are processed.
enum class Stream : std::uint64_t {
    paths = 1,
    breach = 2,
    losses = 3,
    test = 99,
};

/// Counter-based generator: the i-th output is a bijective 64-bit mix of
/// (key, i). Cheap to construct, so each Monte Carlo path owns one.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index);
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

    /// Uniform in the open interval (0, 1).
    double uniform();
    /// Exponential with the given rate (> 0).
    double exponential(double rate);
    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static std::uint64_t mix(std::uint64_t z);

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index);

} // namespace cyberinv
