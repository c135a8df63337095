#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "kcip/lattice.hpp"

namespace kcip {

// Occupancy configuration on n sites, bit-packed 64 sites per word with an
// incrementally maintained particle count.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(int n) : n_(n), count_(0), w_((n + 63) / 64, 0) {}

    static Configuration from_mask(int n, std::uint64_t mask) {
        Configuration x(n);
        if (n > 0) x.w_[0] = mask;
        x.count_ = 0;
        for (auto w : x.w_) x.count_ += std::popcount(w);
        return x;
    }

    static Configuration from_sites(int n, const std::vector<int>& sites) {
        Configuration x(n);
        for (int v : sites) x.set(v, true);
        return x;
    }

    int size() const { return n_; }
    int particles() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool test(int v) const { return (w_[v >> 6] >> (v & 63)) & 1ULL; }

    void set(int v, bool b) {
        std::uint64_t bit = 1ULL << (v & 63);
        std::uint64_t& w = w_[v >> 6];
        if (b) {
            count_ += !(w & bit);
            w |= bit;
        } else {
            count_ -= !!(w & bit);
            w &= ~bit;
        }
    }

    // first 64 sites; valid only when n <= 64 (exact-analysis scales)
    std::uint64_t mask() const { return w_.empty() ? 0 : w_[0]; }

    std::vector<int> occupied_sites() const {
        std::vector<int> s;
        s.reserve(count_);
        for (std::size_t k = 0; k < w_.size(); ++k) {
            std::uint64_t w = w_[k];
            while (w) {
                int b = std::countr_zero(w);
                s.push_back(static_cast<int>(k * 64 + b));
                w &= w - 1;
            }
        }
        return s;
    }

    bool operator==(const Configuration& o) const { return n_ == o.n_ && w_ == o.w_; }

private:
    int n_ = 0;
    int count_ = 0;
    std::vector<std::uint64_t> w_;
};

// True when some neighbour u of v (u != v always on L >= 3) carries a particle.
// This is the kinetic constraint gating updates at v.
inline bool has_occupied_neighbor(const TorusLattice& lat, const Configuration& x, int v) {
    const std::int32_t* nb = lat.neighbors(v);
    for (int i = 0; i < lat.degree(); ++i)
        if (x.test(nb[i])) return true;
    return false;
}

// True when no two particles are adjacent (independent set / hard-core
// configuration; membership test for the Omega_k strata).
inline bool is_independent_config(const TorusLattice& lat, const Configuration& x) {
    for (int v : x.occupied_sites()) {
        const std::int32_t* nb = lat.neighbors(v);
        for (int i = 0; i < lat.degree(); ++i)
            if (x.test(nb[i])) return false;
    }
    return true;
}

}  // namespace kcip
