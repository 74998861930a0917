#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace fairkm {

// splitmix64; used to derive independent stream seeds so that per-tree /
// per-instance randomness does not depend on thread scheduling.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small deterministic generator (xoshiro-free, just splitmix chained).
// std::uniform_*_distribution is implementation-defined, so reports that
// must be bit-reproducible roll their own draws from raw 64-bit output.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53-bit resolution
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    int next_int(int n) { return n <= 1 ? 0 : int(next_u64() % uint64_t(n)); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            int j = next_int(i + 1);
            std::swap(p[i], p[j]);
        }
        return p;
    }

private:
    uint64_t state_;
};

} // namespace fairkm
