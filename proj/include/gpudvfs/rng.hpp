#ifndef GPUDVFS_RNG_HPP
#define GPUDVFS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace gpudvfs {

/// Deterministic PRNG (splitmix64). The standard library's distributions and
/// std::shuffle are implementation-defined, so everything that must reproduce
/// bit-identically across toolchains goes through this generator instead.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi]; lo == hi yields the constant.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no spare caching, fixed draw count).
    double normal(double mean, double stddev) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

    /// Uniform integer in [0, n). Modulo bias is irrelevant at these scales.
    std::size_t bounded(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }

  private:
    std::uint64_t state_;
};

/// FNV-1a over bytes; the stable string hash used for seeds and config hashes.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    return g.next();
}

/// Deterministic uniform in [0,1) keyed by a string. Used for per-app feature
/// gains and distractor values.
inline double keyed_uniform01(std::string_view key) {
    SplitMix64 g(fnv1a64(key));
    return g.uniform01();
}

/// Fisher-Yates with our own generator (std::shuffle is unspecified).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.bounded(i);
        std::swap(v[i - 1], v[j]);
    }
}

/// Identity permutation of size n shuffled with the given seed.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    SplitMix64 rng(seed);
    deterministic_shuffle(p, rng);
    return p;
}

}  // namespace gpudvfs

#endif
