/**
 * @file rng.hpp
 * @brief Seedable, portable random streams with deterministic sub-stream splitting.
 *
 * All randomness in the library flows through these helpers so that results
 * are reproducible bit-for-bit for a given top-level seed, independent of
 * platform standard library and of how work is scheduled across threads.
 * Sub-streams are derived by mixing the parent seed with integer tags via
 * splitmix64; samples come from mt19937_64 plus our own Box-Muller transform
 * (std::normal_distribution is not portable across standard libraries).
 *
 * Stream identifier reported by --version: "splitmix64/mt19937_64+box-muller-v1".
 */
#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ia::rng {

inline constexpr std::string_view kStreamId = "splitmix64/mt19937_64+box-muller-v1";

/// One step of the splitmix64 mixing function.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a sub-stream seed by folding integer tags into a parent seed.
/// derive(s, a, b) != derive(s, b, a) in general; order is part of the key.
constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t t : tags) h = splitmix64(h ^ t);
    return h;
}

template <typename... Tags>
constexpr std::uint64_t derive(std::uint64_t seed, Tags... tags) {
    return derive(seed, {static_cast<std::uint64_t>(tags)...});
}

/// FNV-1a hash, used to turn short labels into sub-stream tags.
constexpr std::uint64_t tag(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic sample stream over one derived seed.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in (0, 1]; never returns 0 so log() below is safe.
    double next_unit() {
        std::uint64_t bits;
        do {
            bits = engine_() >> 11;  // 53 significant bits
        } while (bits == 0);
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Modulo reduction: bias is irrelevant at the
    /// n <= a few dozen sizes used here and the result is platform-stable.
    int next_below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

    /// Standard circularly-symmetric complex Gaussian CN(0,1):
    /// real and imaginary parts i.i.d. N(0, 1/2).
    std::complex<double> next_cnormal() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u) / sqrt(2)
        const double th = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ia::rng
