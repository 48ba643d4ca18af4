#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace streamrec {

// SplitMix64 finalizer. Bijective on 64-bit values, so distinct inputs
// always map to distinct outputs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for child stream `stream` of `master`. For a fixed master, distinct
// stream ids yield pairwise distinct seeds.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master,
                                           std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) + stream);
}

namespace detail {

// 53-bit uniform in [0, 1).
inline double uniform_unit(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Deterministic stream of normal variates. Uses the Box-Muller transform
// with the cosine branch only, so every draw consumes exactly two engine
// words regardless of history. std::normal_distribution is avoided because
// its consumption pattern is implementation-defined.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next(double mean, double stddev) {
        // u1 in (0, 1] keeps the log finite.
        const double u1 =
            static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = detail::uniform_unit(engine_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * radius * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace streamrec
