#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace affinehs {

/// SplitMix64 finaliser.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Counter-based generator: draw i of stream `key` is mix64(key + i·γ). The
 * whole state is (key, counter), so a stream can be forked per path and
 * repositioned exactly.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    /// Independent stream for item `index` of a run seeded with `seed`.
    static CounterRng stream(std::uint64_t seed, std::uint64_t index) {
        return CounterRng(mix64(mix64(seed) ^ (index * 0xD1B54A32D192ED03ULL)), 0);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace affinehs
