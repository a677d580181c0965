#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace negbound {

/// SplitMix64 finalizer (Stafford variant 13).  Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based generator keyed by (seed, purpose tag, stream index).
///
/// Output i of a stream is a pure function of (key, i), so any draw can be
/// reproduced in isolation and disjoint streams never share state.  This is
/// what makes sharded Monte-Carlo runs independent of thread scheduling:
/// shard s always consumes stream s, whichever thread runs it.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0)
        : key_(mix64(mix64(seed ^ fnv1a64(purpose)) + 0x9e3779b97f4a7c15ULL * (index + 1))) {}

    /// Derive an independent substream without touching this stream's counter.
    [[nodiscard]] CounterRng fork(std::string_view purpose, std::uint64_t index = 0) const {
        return CounterRng(key_, purpose, index);
    }

    std::uint64_t next_u64() noexcept {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(key_ ^ counter_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform01_open() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.  No spare caching: each call consumes
    /// exactly two words, so replaying a stream is position-independent.
    double normal() noexcept {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace negbound
