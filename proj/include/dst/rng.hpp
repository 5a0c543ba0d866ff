#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dst {

// SplitMix64 stream. Every source of randomness in the engine (weight init,
// mask sampling, data order, random growth, probe selection) draws from one
// of these, so a run is reproducible bit-for-bit from its master seed on any
// platform. std::uniform_*_distribution is avoided on purpose: its output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is < 2^-53 for any n we use.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller; u1 shifted into (0,1] so log() is safe.
    double next_gauss() {
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t state_;
};

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

// Documented seed-splitting rule: the stream for a component is derived from
// the master seed, the component tag, and up to two integer qualifiers
// (e.g. layer index, round index). Policy comparisons that share a master
// seed therefore share data order and initialization exactly.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::mix64(master ^ fnv1a64(tag));
    h = detail::mix64(h + 0x9E3779B97F4A7C15ull * (a + 1));
    h = detail::mix64(h + 0x9E3779B97F4A7C15ull * (b + 1));
    return h;
}

} // namespace dst
