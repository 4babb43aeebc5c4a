#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace eqr {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream keyed by (seed, tags...). Distribution code is
/// written out here so sequences do not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) : engine_(derive(seed, tags)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = 0;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    double normal()
    {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
    {
        std::uint64_t h = splitmix64(seed);
        for (std::uint64_t t : tags)
            h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
        return h;
    }

    std::mt19937_64 engine_;
};

}  // namespace eqr
