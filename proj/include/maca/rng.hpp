#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "maca/util.hpp"

namespace maca {

// Deterministic random stream. mt19937_64 output is pinned by the standard;
// the uniform/normal transforms are spelled out here instead of using
// std::*_distribution so draws are identical across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Independent stream keyed by a tuple, e.g. {run_seed, update, rollout}.
    static Rng derive(std::initializer_list<std::uint64_t> parts) {
        std::uint64_t h = 0x6d61636172756e73ULL;  // arbitrary fixed tag
        for (std::uint64_t p : parts) h = splitmix64(h ^ p);
        return Rng(h);
    }

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, spare discarded to keep the stream position predictable.
    double normal(double mean, double sd) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    // Uniform index in [0, n). Multiply-shift keeps bias negligible for the
    // desk-scale n used here.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
};

}  // namespace maca
