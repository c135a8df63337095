#pragma once

#include <cstdint>
#include <random>

namespace kcip {

// splitmix64 finalizer (Steele/Lea/Flood). Used only to expand seeds, never
// as the sampling engine.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic uniform sampling on top of mt19937_64. The engine's output
// sequence is pinned by the C++ standard; the std distributions are not, so
// the draw helpers below are hand-rolled to keep trajectories bit-exact
// across platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Stream for replica r of a run with the given master seed:
    //   seed_r = splitmix64(master ^ splitmix64(r + 1)).
    // Distinct replicas get decorrelated, reproducible streams and the
    // assignment is independent of execution order (serial or OpenMP).
    static Rng for_replica(std::uint64_t master, std::uint64_t replica) {
        return Rng(master ^ splitmix64(replica + 1));
    }

    std::uint64_t next_u64() { return eng_(); }

    // uniform on [0,1), 53-bit mantissa
    double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on {0,...,n-1}, unbiased via power-of-two mask rejection
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll((n - 1) | 1);
        std::uint64_t x;
        do {
            x = next_u64() & mask;
        } while (x >= n);
        return x;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace kcip
