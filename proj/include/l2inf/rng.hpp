// Counter-based pseudo-random generator used everywhere randomness is needed.
//
// The stream is the SplitMix64 sequence written in counter form:
//   output(i) = mix64(seed + (i+1) * 0x9E3779B97F4A7C15)
// with mix64 the xor-shift/multiply finalizer from Vigna's reference code.
// Uniform doubles take the top 53 bits; normals use the Marsaglia polar
// method. Everything is pinned down so another implementation (any language)
// can reproduce the exact streams from the seed alone.
#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace l2inf {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Marsaglia polar method; generates pairs, second value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            const double m = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = v * m;
            has_spare_ = true;
            return u * m;
        }
    }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    // Fisher-Yates, high index down.
    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i + 1));
            using std::swap;
            swap(v[i], v[j]);
        }
    }

    // Independent substream keyed by tag; used for per-sample determinism.
    Rng fork(std::uint64_t tag) const { return Rng(mix64(mix64(seed_) ^ mix64(tag))); }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace l2inf
