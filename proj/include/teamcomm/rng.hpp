#pragma once
// Portable random streams.
//
// The generator is xoshiro256** (Blackman & Vigna) seeded by expanding a
// 64-bit seed through splitmix64. All derived draws (uniform doubles,
// bounded integers, normals, gammas) are defined here rather than through
// <random> distributions, whose algorithms differ between standard
// libraries. Identical seeds therefore reproduce identical streams on any
// platform or language that follows the same recipe:
//
//   uniform()   = (next() >> 11) * 2^-53                     in [0, 1)
//   below(n)    = next() % n, rejecting draws < (2^64 mod n)
//   normal()    = Box-Muller, sqrt(-2 ln(1-u1)) * cos(2 pi u2), one value per call
//   gamma(a)    = Marsaglia-Tsang; a < 1 handled by gamma(a+1) * u^(1/a)

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace teamcomm {

inline constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Hash-combines a seed with further values (order-sensitive).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) noexcept;

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value, Rest... rest) noexcept {
    return mix_seed(mix_seed(seed, value), static_cast<std::uint64_t>(rest)...);
}

// 64-bit FNV-1a.
std::uint64_t hash_string(std::string_view s) noexcept;

// i-th run seed of a sweep: seed + i * golden-ratio stride (mod 2^64).
constexpr std::uint64_t run_seed(std::uint64_t seed, std::uint64_t i) noexcept {
    return seed + i * kSeedStride;
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next(); }

    std::uint64_t next() noexcept;
    double uniform() noexcept;
    std::uint64_t below(std::uint64_t n) noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
    double gamma(double shape) noexcept;
    std::vector<double> dirichlet(std::span<const double> alpha);
    std::vector<double> dirichlet(std::size_t n, double alpha);
    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Index drawn proportionally to non-negative weights; total must be their sum.
    std::size_t categorical(std::span<const double> weights, double total) noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace teamcomm
