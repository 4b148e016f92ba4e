#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace oscgroup {

/// Deterministic random source used everywhere randomness is needed.
///
/// Wraps std::mt19937_64 but maps raw 64-bit outputs to doubles itself
/// ((x >> 11) * 2^-53) so that streams are bit-identical across standard
/// library implementations. Every simulation spec stores the seed it was
/// built from, which makes runs replayable.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [lo, hi] inclusive. Modulo bias is irrelevant at
    /// the ranges used here; determinism is what matters.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive independent sub-seeds from one
/// run seed (e.g. seed for inputs vs. seed for initial states).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace oscgroup
