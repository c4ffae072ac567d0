#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace schedleak {

/// splitmix64 finalizer; used to whiten seeds and derive per-stream seeds so
/// replications and streams (per-user sources, policy lotteries) never share
/// state.
inline constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return mix_seed(base ^ mix_seed(stream));
}

/// Seedable, reproducible 64-bit generator. The uniform/exponential draws
/// are hand-rolled from raw 64-bit output (std::uniform_real_distribution is
/// implementation-defined, which would break cross-platform reproducibility).
class Rng {
    std::mt19937_64 gen_;

public:
    explicit Rng(std::uint64_t seed) : gen_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double next_uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Exponential with the given rate (> 0), via inversion.
    double next_exponential(double rate) {
        // -log1p(-u) maps u in [0,1) to (0, inf) without hitting log(0)
        return -std::log1p(-next_uniform()) / rate;
    }
};

}  // namespace schedleak
