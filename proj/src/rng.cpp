#include "cyberinv/rng.hpp"

#include <cmath>
#include <numbers>

namespace cyberinv {

std::uint64_t CounterRng::mix(std::uint64_t z) {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index) {
    CounterRng a(seed);
    const std::uint64_t s = a() ^ (static_cast<std::uint64_t>(stream) * 0xD6E8FEB86659FD93ULL);
    CounterRng b(s);
    return b() ^ CounterRng(index + 0x632BE59BD9B4E019ULL)();
}

CounterRng::CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index)
    : key_(derive_key(seed, stream, index)) {}

double CounterRng::uniform() {
    // 53 random bits, shifted by half an ulp so 0 is never returned
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

double CounterRng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace cyberinv
