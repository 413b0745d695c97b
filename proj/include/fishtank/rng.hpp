#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fishtank {

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace detail

// Seeded random stream with order-independent substream derivation.
// fork(tag) derives from the root seed, not the generator state, so forking
// the same tags in any order yields the same streams. All draws go through
// explicit bit manipulation (never std::*_distribution) to stay bit-identical
// across standard library implementations.
class RngStream {
  public:
    explicit RngStream(uint64_t seed) : seed_(seed), gen_(detail::splitmix64(seed)) {}

    uint64_t seed() const { return seed_; }

    RngStream fork(uint64_t tag) const {
        return RngStream(detail::splitmix64(seed_ ^ detail::splitmix64(tag ^ 0xa02bdbf7bb3c0a7ull)));
    }

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Lemire multiply-shift; bias < 2^-64.
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

  private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace fishtank
