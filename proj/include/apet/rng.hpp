#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "apet/errors.hpp"

// Seeded randomness with portable output. The engine is std::mt19937_64,
// whose output sequence is fixed by the C++ standard, and every derived
// draw (bounded integers, uniforms, Gaussians) is built here from raw
// engine words rather than through std::*_distribution, whose mappings are
// implementation-defined. Same seed, same numbers, on every platform.

namespace apet::rng {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
inline std::uint64_t bounded(Engine& eng, std::uint64_t bound) {
    // threshold = 2^64 mod bound; values in [threshold, 2^64) cover a whole
    // number of residue classes.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t v = eng();
        if (v >= threshold) return (v - threshold) % bound;
    }
}

/// Uniform double in [0, 1) from the top 53 bits of one engine word.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// m distinct indices drawn without replacement from [0, n), returned
/// sorted ascending. Partial Fisher-Yates over an index array.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                           Engine& eng) {
    if (m < 1 || m > n) throw InvalidBudget("sample size must satisfy 1 <= m <= n");
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(eng, n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(m);
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// Standard normal deviates via Box-Muller on 53-bit uniforms. Generates
/// pairs and caches the spare, so draws consume engine words in a fixed
/// pattern.
class GaussianSampler {
public:
    double next(Engine& eng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(eng); // (0, 1], keeps the log finite
        const double u2 = uniform01(eng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace apet::rng
