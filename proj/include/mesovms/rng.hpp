#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mesovms/types.hpp"

namespace mesovms {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Sub-stream seed for (day, replication) pairs. Independent of anything
/// else, so the same pair gets the same stream in every caller (common
/// random numbers across candidate policies).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

/// Deterministic random source. mt19937_64 supplies raw bits; the samplers
/// below are pinned here instead of using <random> distributions, whose
/// output sequences are implementation-defined. Every sampler documents how
/// many raw draws it consumes so tests can replay the stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform in [0,1) with 53 random bits. One raw draw.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// True with probability p. One raw draw.
    bool bernoulli(double p) { return uniform01() < p; }

    /// Index into `weights` (need not be normalized). One raw draw.
    std::size_t weighted_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Poisson by inversion (sequential search); adequate for the per-minute
    /// demand rates used here. Consumes one raw draw.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        double u = uniform01();
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }

    /// Standard normal via Box-Muller. Consumes two raw draws.
    double normal01() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mesovms
