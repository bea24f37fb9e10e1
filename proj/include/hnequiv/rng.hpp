#pragma once

// Seeded random streams.
//
// Generator identity: xoshiro256** 1.0 (Blackman & Vigna), state filled from
// the 64-bit seed by splitmix64. Uniform doubles take the top 53 bits.
// Normal variates use the Box-Muller transform, one pair per two uniforms.
// Every stream is fully determined by its seed on every platform.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace hnequiv {

struct RngSeed {
    std::uint64_t value = 0;
    friend bool operator==(RngSeed, RngSeed) = default;
};

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Sub-seed for (master, tag...) such that distinct tag tuples give
/// statistically independent streams. Used for per-replication and
/// per-vector seeding so parallel and serial runs agree.
inline constexpr RngSeed derive_seed(RngSeed master, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t state = master.value;
    std::uint64_t h = splitmix64_next(state);
    for (std::uint64_t t : tags) {
        state = h ^ (t * 0xD6E8FEB86659FD93ULL);
        h = splitmix64_next(state);
    }
    return RngSeed{h};
}

/// Tag for a real-valued cell key (e.g. an epsilon); exact bit pattern.
inline std::uint64_t seed_tag(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

/// xoshiro256**; satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(RngSeed seed) noexcept {
        std::uint64_t sm = seed.value;
        for (auto& s : state_) s = splitmix64_next(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    /// Uniform on [lo, hi) (or (hi, lo] when hi < lo).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace hnequiv
