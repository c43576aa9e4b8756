#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace lwgan {

/// SplitMix64 output function, used both as the counter mixer and for key
/// derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the i-th draw of a stream is a pure function of
/// (key, i), namely mix64(key + (i + 1) * golden).
///
/// Split rule: `split(id)` derives the child key
///     mix64(key ^ mix64(id + 0xD1B54A32D192ED03))
/// and starts the child counter at zero. Children never share a key with
/// their parent for any practical purpose, so components that own a split
/// stream draw independently of each other and of the parent.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open0();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Unbiased integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    [[nodiscard]] Rng split(std::uint64_t stream) const noexcept {
        Rng child{0};
        child.key_ = mix64(key_ ^ mix64(stream + 0xD1B54A32D192ED03ULL));
        return child;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Well-known stream ids so that every subsystem derives its randomness from
/// a single user seed the same way.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kInit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kLambda = 5;
inline constexpr std::uint64_t kBootstrap = 6;
}  // namespace streams

}  // namespace lwgan
